#include "ntlc/featurizer.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ntlc/error.hpp"

namespace ntlc {

Word make_word(std::string_view text) {
    if (text.size() != kLettersPerWord)
        throw MalformedRow("word '" + std::string(text) + "' is not 4 letters");
    Word w;
    for (int i = 0; i < kLettersPerWord; ++i) {
        char c = text[i];
        if (c < 'a' || c >= 'a' + kAlphabetSize)
            throw MalformedRow("word '" + std::string(text) + "' outside alphabet a..h");
        w[i] = c;
    }
    return w;
}

char bucket_letter(uint64_t value) {
    int idx = 0;
    while (value >= 10 && idx < kAlphabetSize - 1) {
        value /= 10;
        ++idx;
    }
    return static_cast<char>('a' + idx);
}

Word encode_window(const WindowCounts& w) {
    return Word{bucket_letter(w.up_pkts), bucket_letter(w.down_pkts),
                bucket_letter(w.up_bytes), bucket_letter(w.down_bytes)};
}

std::array<WindowCounts, kWordsPerSentence> window_counts(const TraceSample& sample,
                                                          const Subnet& client_subnet) {
    std::array<WindowCounts, kWordsPerSentence> windows{};
    for (const auto& pkt : sample.packets) {
        int k = static_cast<int>(pkt.timestamp_ms / kWindowMs);
        if (k < 0 || k >= kWordsPerSentence)
            throw MalformedRow("packet timestamp " + std::to_string(pkt.timestamp_ms) +
                               " outside the 60 s sample");
        WindowCounts& w = windows[static_cast<size_t>(k)];
        if (assign_direction(pkt, client_subnet) == Direction::Upstream) {
            w.up_pkts += 1;
            w.up_bytes += pkt.size_bytes;
        } else {
            w.down_pkts += 1;
            w.down_bytes += pkt.size_bytes;
        }
    }
    return windows;
}

FeatureSentence featurize_sample(const TraceSample& sample, const Subnet& client_subnet) {
    auto windows = window_counts(sample, client_subnet);
    FeatureSentence sentence(kWordsPerSentence);
    for (int k = 0; k < kWordsPerSentence; ++k) sentence[k] = encode_window(windows[k]);
    return sentence;
}

int Vocabulary::id_of(const Word& w) const {
    auto it = index_.find(word_str(w));
    return it == index_.end() ? 0 : it->second;
}

const Word& Vocabulary::word_of(int id) const {
    if (id < 1 || id > size())
        throw IdOutOfRange("vocabulary id " + std::to_string(id) + " not in 1.." +
                           std::to_string(size()));
    return entries_[static_cast<size_t>(id - 1)].word;
}

Vocabulary Vocabulary::from_entries(std::vector<Entry> entries) {
    Vocabulary v;
    v.entries_ = std::move(entries);
    for (size_t i = 0; i < v.entries_.size(); ++i)
        v.index_[word_str(v.entries_[i].word)] = static_cast<int>(i + 1);
    return v;
}

Vocabulary build_vocabulary(const std::vector<FeatureSentence>& corpus) {
    if (corpus.empty()) throw EmptyCorpus("cannot build a vocabulary from zero sentences");
    // std::map keys sort lexicographically, which settles frequency ties.
    std::map<std::string, uint64_t> freq;
    for (const auto& sentence : corpus)
        for (const auto& w : sentence) ++freq[word_str(w)];
    std::vector<Vocabulary::Entry> entries;
    entries.reserve(freq.size());
    for (const auto& [word, count] : freq)
        entries.push_back({make_word(word), count});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.frequency > b.frequency; });
    return Vocabulary::from_entries(std::move(entries));
}

std::vector<int> tokenize(const FeatureSentence& sentence, const Vocabulary& vocab) {
    std::vector<int> ids(sentence.size());
    for (size_t i = 0; i < sentence.size(); ++i) ids[i] = vocab.id_of(sentence[i]);
    return ids;
}

FeatureSentence detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
    FeatureSentence sentence(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) sentence[i] = vocab.word_of(ids[i]);
    return sentence;
}

void write_sentences(const std::vector<std::pair<std::string, FeatureSentence>>& rows,
                     std::ostream& out) {
    for (const auto& [id, sentence] : rows) {
        out << id << '\t';
        for (size_t i = 0; i < sentence.size(); ++i) {
            if (i) out << ' ';
            out.write(sentence[i].data(), kLettersPerWord);
        }
        out << '\n';
    }
}

std::vector<std::pair<std::string, FeatureSentence>> read_sentences(std::istream& in) {
    std::vector<std::pair<std::string, FeatureSentence>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw MalformedRow("sentence line " + std::to_string(line_no) +
                               ": expected `sample_id<TAB>words`");
        FeatureSentence sentence;
        sentence.reserve(kWordsPerSentence);
        std::istringstream words(line.substr(tab + 1));
        std::string tok;
        while (words >> tok) sentence.push_back(make_word(tok));
        if (sentence.size() != kWordsPerSentence)
            throw MalformedRow("sentence line " + std::to_string(line_no) + ": got " +
                               std::to_string(sentence.size()) + " words, want 200");
        rows.emplace_back(line.substr(0, tab), std::move(sentence));
    }
    return rows;
}

void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
    const auto& entries = vocab.entries();
    for (size_t i = 0; i < entries.size(); ++i) {
        out.write(entries[i].word.data(), kLettersPerWord);
        out << ' ' << (i + 1) << ' ' << entries[i].frequency << '\n';
    }
}

Vocabulary read_vocabulary(std::istream& in) {
    std::vector<Vocabulary::Entry> entries;
    std::string word;
    int id = 0;
    uint64_t freq = 0;
    while (in >> word >> id >> freq) {
        if (id != static_cast<int>(entries.size()) + 1)
            throw MalformedRow("vocabulary ids must be contiguous from 1");
        entries.push_back({make_word(word), freq});
    }
    return Vocabulary::from_entries(std::move(entries));
}

} // namespace ntlc
