#pragma once

#include <string>

#include "json.hpp"

#include "spectrafit/fit.hpp"
#include "spectrafit/lse.hpp"
#include "spectrafit/modelselect.hpp"
#include "spectrafit/stats.hpp"

namespace spectrafit {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// {"schema": 1, "kind": "model", "lift", "d", "map" (row-major rows), ...}
/// plus the fit diagnostics when `fit` is given.
Json model_to_json(const SetEstimate& est, const FitResult* fit = nullptr);
/// Rejects documents whose schema is not kSchemaVersion.
SetEstimate model_from_json(const Json& j);

Json lse_to_json(const LsePolytope& poly);
Json cv_to_json(const CvCurve& curve);
Json covariance_to_json(const CovarianceReport& rep);

/// "lift,lifted_dim,mean_mse" rows.
std::string cv_to_csv(const CvCurve& curve);
/// One row per used trial: v0_x,v0_y,...
std::string deviations_to_csv(const CovarianceReport& rep);
/// Hull of 3D points as an OFF mesh.
std::string points_to_off(const std::vector<Eigen::VectorXd>& points);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const Json& j);
SetEstimate read_model(const std::string& path);

}  // namespace spectrafit
