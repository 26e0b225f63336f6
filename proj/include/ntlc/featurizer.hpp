#ifndef NTLC_FEATURIZER_HPP
#define NTLC_FEATURIZER_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ntlc/traffic.hpp"

namespace ntlc {

inline constexpr int kWordsPerSentence = 200;
inline constexpr double kWindowMs = 300.0;
inline constexpr int kLettersPerWord = 4;
inline constexpr int kAlphabetSize = 8;  // 'a'..'h'
inline constexpr int kMaxVocabulary = 4096;  // 8^4

struct WindowCounts {
    uint64_t up_pkts = 0, down_pkts = 0;
    uint64_t up_bytes = 0, down_bytes = 0;
};

// Exactly four characters, each in 'a'..'h'.
using Word = std::array<char, kLettersPerWord>;

inline std::string word_str(const Word& w) { return std::string(w.data(), w.size()); }
Word make_word(std::string_view text);  // validates length and alphabet

using FeatureSentence = std::vector<Word>;  // always kWordsPerSentence long

// Decade bucket of a count: 'a' for 0, otherwise 'a' + min(floor(log10 V), 7).
char bucket_letter(uint64_t value);

// Letter order is [up_pkts, down_pkts, up_bytes, down_bytes].
Word encode_window(const WindowCounts& w);

// Aggregates packets into the 200 non-overlapping 300 ms windows [300k, 300(k+1)).
std::array<WindowCounts, kWordsPerSentence> window_counts(const TraceSample& sample,
                                                          const Subnet& client_subnet);

FeatureSentence featurize_sample(const TraceSample& sample, const Subnet& client_subnet);

// Word ids: 0 reserved for out-of-vocabulary, then 1..N in descending corpus
// frequency with lexicographic tie-break.
class Vocabulary {
public:
    struct Entry {
        Word word;
        uint64_t frequency;
    };

    int id_of(const Word& w) const;  // 0 when unseen
    const Word& word_of(int id) const;  // ids 1..size()
    int size() const { return static_cast<int>(entries_.size()); }
    const std::vector<Entry>& entries() const { return entries_; }

    static Vocabulary from_entries(std::vector<Entry> entries);

private:
    std::vector<Entry> entries_;  // index i holds id i+1
    std::unordered_map<std::string, int> index_;
};

Vocabulary build_vocabulary(const std::vector<FeatureSentence>& corpus);

std::vector<int> tokenize(const FeatureSentence& sentence, const Vocabulary& vocab);
FeatureSentence detokenize(const std::vector<int>& ids, const Vocabulary& vocab);

// Sentence file: `sample_id<TAB>word_1 word_2 ... word_200` per line.
void write_sentences(const std::vector<std::pair<std::string, FeatureSentence>>& rows,
                     std::ostream& out);
std::vector<std::pair<std::string, FeatureSentence>> read_sentences(std::istream& in);

// Vocabulary file: `word id frequency` per line in id order.
void write_vocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary read_vocabulary(std::istream& in);

} // namespace ntlc

#endif
