#include "ringrc/readout.hpp"

#include "ringrc/errors.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace ringrc {

namespace {

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& V) {
    Eigen::MatrixXd out(V.rows() + 1, V.cols());
    out.topRows(V.rows()) = V;
    out.row(V.rows()).setOnes();
    return out;
}

}  // namespace

WeightMatrix train(const Eigen::MatrixXd& V_in, const Eigen::MatrixXd& Y, const TrainOptions& options) {
    if (V_in.cols() != Y.cols()) {
        throw InputError(fmt::format("training matrix has {} columns but targets have {}",
                                     V_in.cols(), Y.cols()));
    }
    if (V_in.cols() == 0) throw InputError("no training columns");
    if (options.ridge < 0.0) throw ConfigError("ridge must be >= 0");

    const Eigen::MatrixXd V = options.bias ? with_bias(V_in) : V_in;
    WeightMatrix W;
    W.ridge = options.ridge;
    W.bias = options.bias;
    if (V.cols() < V.rows()) {
        W.warnings.push_back(fmt::format("fewer training columns ({}) than features ({})", V.cols(),
                                         V.rows()));
    }
    if (!V.allFinite() || !Y.allFinite()) throw InputError("training data contains non-finite values");

    if (V_in.isZero(0.0)) {
        W.warnings.emplace_back("training matrix is all zero; weights set to zero");
        W.weights = Eigen::MatrixXd::Zero(Y.rows(), V.rows());
        return W;
    }

    if (options.ridge > 0.0) {
        Eigen::MatrixXd gram = V * V.transpose();
        gram.diagonal().array() += options.ridge;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        // W^T = (V V^T + lambda I)^-1 V Y^T
        W.weights = ldlt.solve(V * Y.transpose()).transpose();
        W.rank = V.rows();
        return W;
    }

    // Least squares on V^T W^T = Y^T; the thin SVD of V^T = U S Q^T gives
    // W^T = Q S^+ U^T Y^T.
    const Eigen::MatrixXd A = V.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = options.rcond * s(0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            inv(i) = 1.0 / s(i);
            ++W.rank;
        }
    }
    const Eigen::MatrixXd projected = svd.matrixU().transpose() * Y.transpose();
    W.weights = (svd.matrixV() * (inv.asDiagonal() * projected)).transpose();
    return W;
}

Eigen::MatrixXd predict(const WeightMatrix& W, const Eigen::MatrixXd& V) {
    if (V.rows() != W.features()) {
        throw InputError(fmt::format("readout expects {} features, got {}", W.features(), V.rows()));
    }
    if (!W.bias) return W.weights * V;
    Eigen::MatrixXd out = W.weights.leftCols(V.rows()) * V;
    out.colwise() += W.weights.col(V.rows());
    return out;
}

int vote(const Eigen::MatrixXd& unit_predictions) {
    if (unit_predictions.cols() == 0 || unit_predictions.rows() == 0) {
        throw InputError("vote needs at least one unit column");
    }
    const Eigen::VectorXd mean = unit_predictions.rowwise().mean();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < mean.size(); ++i) {
        if (mean(i) > mean(best)) best = i;
    }
    return static_cast<int>(best);
}

double squared_correlation(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.size() != truth.size()) throw InputError("correlation inputs differ in length");
    if (predicted.size() < 2) throw InputError("correlation needs at least two values");
    const double n = static_cast<double>(predicted.size());
    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        mp += predicted[i];
        mt += truth[i];
    }
    mp /= n;
    mt /= n;
    double spp = 0.0, stt = 0.0, spt = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double dp = predicted[i] - mp;
        const double dt = truth[i] - mt;
        spp += dp * dp;
        stt += dt * dt;
        spt += dp * dt;
    }
    // a prediction that is constant up to rounding has no variance
    if (spp <= 1e-24 * (spp + n * mp * mp) || stt <= 1e-24 * (stt + n * mt * mt)) return 0.0;
    const double r2 = (spt * spt) / (spp * stt);
    return std::clamp(r2, 0.0, 1.0);
}

Eigen::MatrixXd one_hot(std::span<const int> labels, int classes) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) throw InputError("label out of range");
        Y(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
    }
    return Y;
}

void save_weights(const WeightMatrix& W, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# ringrc-weights v1\n";
    out << "# rows: " << W.weights.rows() << '\n';
    out << "# cols: " << W.weights.cols() << '\n';
    out << "# ridge: " << fmt::format("{}", W.ridge) << '\n';
    out << "# bias: " << (W.bias ? 1 : 0) << '\n';
    out << "# rank: " << W.rank << '\n';
    for (const auto& [k, v] : W.metadata) out << "# " << k << ": " << v << '\n';
    for (Eigen::Index r = 0; r < W.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < W.weights.cols(); ++c) {
            out << (c ? "," : "") << fmt::format("{}", W.weights(r, c));
        }
        out << '\n';
    }
}

WeightMatrix load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    WeightMatrix W;
    Eigen::Index rows = -1, cols = -1;
    std::string line;
    std::vector<double> data;
    bool magic = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line == "# ringrc-weights v1") {
                magic = true;
                continue;
            }
            const auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 2);
            if (key == "rows") rows = std::stol(value);
            else if (key == "cols") cols = std::stol(value);
            else if (key == "ridge") W.ridge = std::stod(value);
            else if (key == "bias") W.bias = value == "1";
            else if (key == "rank") W.rank = std::stol(value);
            else W.metadata[key] = value;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) data.push_back(std::stod(cell));
    }
    if (!magic || rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw InputError("malformed weight file " + path.string());
    }
    W.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) W.weights(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    return W;
}

}  // namespace ringrc
