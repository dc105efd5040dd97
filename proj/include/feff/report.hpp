#pragma once

// Report emission. JSON numbers are printed with 17 significant digits;
// reports carry no timing or host information, so equal inputs give equal
// bytes.

#include <json.hpp>
#include <string>

#include "feff/check.hpp"
#include "feff/geocalc.hpp"

namespace feff {

nlohmann::ordered_json to_json(const CheckReport& r);
nlohmann::ordered_json to_json(const HolonomyReport& h);
nlohmann::ordered_json to_json(const SelftestResult& s);
nlohmann::ordered_json to_json(const CurvatureBundle& b, const std::vector<std::string>& coords);

/// Deterministic serialisation: two-space indent, keys in insertion order,
/// doubles as %.17g, non-finite doubles as null.
std::string dump_json(const nlohmann::ordered_json& j);

/// Human-readable report: one PASS/FAIL line per check with its anchor.
std::string render_text(const CheckReport& r);
std::string render_text(const SelftestResult& s);

}  // namespace feff
