#pragma once

#include <json.hpp>
#include <string>

#include "copscan/classify.hpp"

namespace copscan {

using nlohmann::json;

struct schema_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SupportField <-> {"dim": d, "L": cap, "coeffs": [...]}
json to_json(const SupportField& f);
SupportField support_field_from_json(const json& j);

// Raw little-endian float64 coefficient dump.
void save_coeffs_binary(const SupportField& f, const std::string& path);
SupportField load_coeffs_binary(const SphereDim& dim, int degree_cap, const std::string& path);

// EllipsoidSpec <-> {"lambda": [...], "rotation": [[...]], "center": [...]}
json to_json(const EllipsoidSpec& spec);
EllipsoidSpec ellipsoid_spec_from_json(const json& j);

// TubeSpec <-> {"dim", "L", "family", "params", "z_range"}; affine images
// nest their base spec under params.base.
json to_json(const TubeSpec& t);
TubeSpec tube_spec_from_json(const json& j);
TubeSpec load_tube_spec(const std::string& path);
void save_tube_spec(const TubeSpec& t, const std::string& path);

json to_json(const CentrixReport& rep, const QuadratureRule& rule);
json to_json(const EllipsoidTestReport& rep);
json to_json(const AffineTestReport& rep);
json to_json(const Classification& c);
json to_json(const SectionReport& rep);

// Field dumps, one row per grid point.
void write_transverse_csv(const TransverseSupport& ts, const std::string& path);
json transverse_coefficients_json(const TransverseSupport& ts);
void write_obstruction_csv(const GridVectorField& V, const GridScalarField& S,
                           const TransverseSupport& ts, const std::vector<Vec3>& taus,
                           const std::string& path);
void write_section_csv(const SectionReport& rep, const QuadratureRule& rule,
                       const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

}  // namespace copscan
