#pragma once

// Linear readout: Moore-Penrose / ridge training, prediction, r^2 scoring and
// digit voting.

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ringrc {

struct TrainOptions {
    double ridge = 0.0;          ///< lambda; 0 = pure pseudoinverse
    bool bias = false;           ///< append a constant row to V
    double rcond = 1e-12;        ///< singular values below rcond * sigma_max are dropped
};

struct WeightMatrix {
    Eigen::MatrixXd weights;  ///< outputs x (features [+1 if bias])
    double ridge = 0.0;
    bool bias = false;
    Eigen::Index rank = 0;    ///< numerical rank used (pseudoinverse path)
    std::map<std::string, std::string> metadata;
    std::vector<std::string> warnings;

    [[nodiscard]] Eigen::Index features() const { return weights.cols() - (bias ? 1 : 0); }
};

/// W = Y V^+ (ridge == 0) or W = Y V^T (V V^T + lambda I)^-1.
/// V holds one sample per column, Y one target per column.
[[nodiscard]] WeightMatrix train(const Eigen::MatrixXd& V, const Eigen::MatrixXd& Y,
                                 const TrainOptions& options = {});

/// Y' = W V'.
[[nodiscard]] Eigen::MatrixXd predict(const WeightMatrix& W, const Eigen::MatrixXd& V);

/// Average the unit columns and return the arg-max row; ties go to the lower index.
[[nodiscard]] int vote(const Eigen::MatrixXd& unit_predictions);

/// Squared Pearson correlation; 0 when either side has zero variance.
[[nodiscard]] double squared_correlation(std::span<const double> predicted,
                                         std::span<const double> truth);

/// One-hot targets (classes x labels.size()).
[[nodiscard]] Eigen::MatrixXd one_hot(std::span<const int> labels, int classes = 10);

/// CSV with '#' metadata header lines; see README for the layout.
void save_weights(const WeightMatrix& W, const std::filesystem::path& path);
[[nodiscard]] WeightMatrix load_weights(const std::filesystem::path& path);

}  // namespace ringrc
