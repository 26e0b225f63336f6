#ifndef NTLC_ERROR_HPP
#define NTLC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ntlc {

// All recoverable failures carry a stable kind tag so the CLI can print a
// machine-parseable "error: <Kind>: <detail>" line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define NTLC_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& detail)                    \
            : Error(#Name, detail) {}                               \
    }

NTLC_DEFINE_ERROR(MalformedRow);
NTLC_DEFINE_ERROR(UnorderedTrace);
NTLC_DEFINE_ERROR(AmbiguousDirection);
NTLC_DEFINE_ERROR(TooManyClients);
NTLC_DEFINE_ERROR(EmptyCorpus);
NTLC_DEFINE_ERROR(ShapeMismatch);
NTLC_DEFINE_ERROR(IdOutOfRange);
NTLC_DEFINE_ERROR(BadConfig);
NTLC_DEFINE_ERROR(DegenerateClass);
NTLC_DEFINE_ERROR(DegenerateLabels);
NTLC_DEFINE_ERROR(NoPairSamples);
NTLC_DEFINE_ERROR(NonFiniteLoss);
NTLC_DEFINE_ERROR(IoError);

#undef NTLC_DEFINE_ERROR

} // namespace ntlc

#endif
