#pragma once

#include <string>

namespace illatra {

// Three-valued outcome of a semi-decision.
enum class Verdict { False, Unknown, True };

inline Verdict v_and(Verdict a, Verdict b) {
    if (a == Verdict::False || b == Verdict::False) return Verdict::False;
    if (a == Verdict::True && b == Verdict::True) return Verdict::True;
    return Verdict::Unknown;
}

inline Verdict v_or(Verdict a, Verdict b) {
    if (a == Verdict::True || b == Verdict::True) return Verdict::True;
    if (a == Verdict::False && b == Verdict::False) return Verdict::False;
    return Verdict::Unknown;
}

inline Verdict v_not(Verdict a) {
    if (a == Verdict::True) return Verdict::False;
    if (a == Verdict::False) return Verdict::True;
    return Verdict::Unknown;
}

inline Verdict v_of(bool b) { return b ? Verdict::True : Verdict::False; }

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        default: return "unknown";
    }
}

}  // namespace illatra
