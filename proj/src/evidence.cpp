#include "atypia/evidence.hpp"

#include "atypia/errors.hpp"

namespace atypia {

std::string_view reason_name(Reason reason) {
    switch (reason) {
        case Reason::Object: return "object";
        case Reason::Context: return "context";
        case Reason::Scene: return "scene";
    }
    return "unknown";
}

Reason reason_from_name(std::string_view name) {
    if (name == "object") return Reason::Object;
    if (name == "context") return Reason::Context;
    if (name == "scene") return Reason::Scene;
    throw Error("ParseError", "unknown reason '" + std::string(name) + "'");
}

}  // namespace atypia
