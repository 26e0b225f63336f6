#include "ntlc/nn.hpp"

#include "ntlc/error.hpp"

namespace ntlc {

std::string_view arch_name(Arch a) {
    switch (a) {
        case Arch::Han: return "han";
        case Arch::Kim: return "kim";
        case Arch::Berger: return "berger";
        case Arch::Cruz: return "cruz";
    }
    return "?";
}

Arch parse_arch(std::string_view name) {
    if (name == "han") return Arch::Han;
    if (name == "kim") return Arch::Kim;
    if (name == "berger") return Arch::Berger;
    if (name == "cruz") return Arch::Cruz;
    throw BadConfig("unknown architecture '" + std::string(name) +
                    "' (want han, kim, berger, or cruz)");
}

} // namespace ntlc
