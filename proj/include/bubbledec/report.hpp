#pragma once

#include "bubbledec/extraction.hpp"

#include <string>

namespace bubbledec {

std::string report_to_json(const DecompositionReport& report);
DecompositionReport report_from_json(const std::string& text);
bool reports_equal(const DecompositionReport& a, const DecompositionReport& b);

/// Ledger parts must re-sum to the recorded slack (internal consistency of
/// a serialized report).
bool ledgers_consistent(const DecompositionReport& report, double tol = 1e-10);

/// All floating-point CSV output uses 17 significant digits.
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
std::string ledger_csv(const std::vector<LedgerRow>& rows);
std::string remainder_norms_csv(const DecompositionReport& report);

}  // namespace bubbledec
