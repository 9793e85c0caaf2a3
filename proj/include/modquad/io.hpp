#pragma once

// JSON serialization of the toolkit's data types and the polynomial text
// parser.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "modquad/additive.hpp"
#include "modquad/constructions.hpp"
#include "modquad/counting.hpp"
#include "modquad/quadratic.hpp"
#include "modquad/rigidity.hpp"
#include "modquad/zmod_linalg.hpp"

namespace modquad {

using Json = nlohmann::ordered_json;

/// Parses "c + a*xi + a*xi*xj + ... mod m" (1-based indices; a term may be
/// a bare constant, and '-' negates the following term). The number of
/// variables is the largest index used unless `n` is given.
QuadPoly parse_poly_text(std::string_view text, std::optional<std::size_t> n = std::nullopt);

/// Accepts polynomial text, a JSON object, or a path to a file holding
/// either.
QuadPoly parse_poly(const std::string& text_or_path, std::optional<std::size_t> n = std::nullopt);

/// Canonical text form, e.g. "x1 + x2 + x1*x2 mod 2".
std::string format_poly(const QuadPoly& f);

Json to_json(const QuadPoly& f);
QuadPoly poly_from_json(const Json& j);

Json to_json(const ZmMatrix& a);
ZmMatrix matrix_from_json(const Json& j);

Json to_json(const GroupShape& s);
Json to_json(const SmithDecomposition& d);
Json to_json(const ResidueHistogram& h);
Json to_json(const OffDiagonalBlock& b);
Json to_json(const RigidityReport& r);
Json to_json(const BooleanRankBound& b);
Json to_json(const DavenportResult& d);
Json to_json(const SolutionBoundsReport& r);
Json to_json(const LinearSystem& s);
LinearSystem system_from_json(const Json& j);
Json to_json(const MvfFamily& fam);
Json to_json(const CliqueResult& c);

/// Reads a whole file; throws PreconditionError if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace modquad
