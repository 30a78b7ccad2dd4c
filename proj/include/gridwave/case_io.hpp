#pragma once

#include <filesystem>

#include "gridwave/case_data.hpp"

namespace gridwave {

/// Reads buses.csv, branches.csv, the optional device tables and scenario.cfg
/// from `dir`. Throws Error with MissingFile / MalformedRow / DuplicateId /
/// DanglingReference on structural problems; rule-level checks live in
/// validate_case.
NetworkCase load_case(const std::filesystem::path& dir);

/// Writes the case back out so that load_case(save_case(c)) == c up to
/// materialized defaults. Optional fields that are absent are written as
/// `none`.
void save_case(const NetworkCase& c, const std::filesystem::path& dir);

/// Structural and physical sanity rules: slack count, reactance orderings,
/// positive time constants, device/bus consistency, fault window, network
/// connectivity. An empty report means every downstream module will accept
/// the case.
ValidationReport validate_case(const NetworkCase& c);

}  // namespace gridwave
