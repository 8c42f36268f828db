#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "obliq/comparison.hpp"
#include "obliq/mmatrix.hpp"
#include "obliq/particles.hpp"
#include "obliq/paths.hpp"
#include "obliq/skorokhod.hpp"
#include "obliq/suites.hpp"

// Serialized forms use one-based component indices; every parser throws
// FormatError on missing or mistyped fields.
namespace obliq::io {

using nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

/// {"qplus": [...], "qminus": [...]} or {"symmetric": N}.
CollisionParams params_from_json(const json& j);
json params_to_json(const CollisionParams& q);

/// {"start", "breakpoints", "axes" (one-based), "slopes"}.
RegularPath regular_path_from_json(const json& j);
json regular_path_to_json(const RegularPath& p);

/// {"dim", "drift", "covariance", "horizon", "steps", "seed"}.
BrownianSpec brownian_from_json(const json& j);
json brownian_to_json(const BrownianSpec& s);

/// {"g", "sigma2", "q", "y0", "horizon", "steps", "seed", "zero_noise"}.
CbpSpec cbp_from_json(const json& j);
json cbp_to_json(const CbpSpec& s);

/// `t,<prefix>1,...` rows, %.17g.
std::string path_csv(const SampledPath& p, const std::string& prefix = "x");
/// Reads `t,x1,...,xd` (header required).
SampledPath path_from_csv(std::istream& in);

/// t,z1..zd,l1..ld
std::string skorokhod_csv(const SkorokhodSolution& s);
/// t,y1..yN,l12..l(N-1)N,z1..z(N-1)
std::string particles_csv(const ParticleSystemSolution& s);

json events_to_json(const std::vector<BoundaryEvent>& events);
json report_to_json(const ComparisonReport& r);
json suite_to_json(const SuiteResult& s);

}  // namespace obliq::io
