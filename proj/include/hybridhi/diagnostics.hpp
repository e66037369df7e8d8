#pragma once

#include <string>
#include <vector>

namespace hybridhi {

// A structured warning/skip record. Operations that degrade gracefully
// (skipped units, degenerate channels, omitted thresholds) append these
// instead of throwing.
struct Diagnostic {
    std::string code;     // stable machine-readable key, e.g. "constant_channel"
    std::string message;  // human readable detail
};

using Diagnostics = std::vector<Diagnostic>;

// Writes each record as one JSON line on stderr.
void emit(const Diagnostics& diags, const std::string& source);

}  // namespace hybridhi
