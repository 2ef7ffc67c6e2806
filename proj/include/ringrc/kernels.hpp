#pragma once

// Data-parallel kernels. Each has an OpenMP path and a serial reference path;
// both produce bit-identical results (work items are independent and write
// disjoint outputs, so no reduction order depends on the thread count).

#include "ringrc/multiplex.hpp"
#include "ringrc/readout.hpp"
#include "ringrc/speech.hpp"
#include "ringrc/tasks.hpp"

#include <string>
#include <vector>

namespace ringrc {

enum class Execution { serial, parallel };

/// Number of worker threads the parallel path will use.
[[nodiscard]] int worker_threads();

// --- capacity sweep --------------------------------------------------------

struct SweepPoint {
    double interval = 0.0;  ///< theta_int [s]
    double gain_db = 0.0;
};

struct SweepResult {
    SweepPoint point;
    CapacityResult stm;
    CapacityResult pc;
    std::string error;  ///< non-empty when the point failed

    [[nodiscard]] bool ok() const { return error.empty(); }
};

struct SweepSettings {
    RingParams ring;
    std::size_t samples = 20;  ///< virtual neurons per input interval
    SplitSpec split;
    CapacityOptions capacity;
    double preroll_time = 0.0;
    std::uint64_t noise_seed = 5;
};

/// Runs `series` through the reservoir at every point and scores STM and PC.
/// Failures are recorded per point, never thrown.
[[nodiscard]] std::vector<SweepResult> sweep_capacities(const SweepSettings& settings,
                                                        const BinarySeries& series,
                                                        std::span<const SweepPoint> points,
                                                        Execution execution);

// --- corpus preprocessing ----------------------------------------------------

/// Spectral feature matrix (N_f x N_int) of every digit.
[[nodiscard]] std::vector<Eigen::MatrixXd> corpus_features(const Corpus& corpus, Execution execution);

/// Masked, normalised reservoir inputs (N_theta x N_int) of every digit.
[[nodiscard]] std::vector<Eigen::MatrixXd> corpus_inputs(const std::vector<Eigen::MatrixXd>& features,
                                                         const MaskMatrix& mask, NormalizationScope scope,
                                                         Execution execution);

// --- cross-validation --------------------------------------------------------

/// Test-set indices per fold: fold f holds every sample with utterance == f.
[[nodiscard]] std::vector<std::vector<std::size_t>> make_folds(const Corpus& corpus, std::size_t folds);

struct FoldOutcome {
    double accuracy = 0.0;
    Eigen::MatrixXi confusion;  ///< 10 x 10, row = true digit, column = predicted
    std::vector<int> predictions;  ///< aligned with the fold's test indices
};

/// Trains a readout on all units of the training digits and classifies the
/// test digits by averaging their unit predictions. `states[j]` holds one
/// column per sound unit of digit j.
[[nodiscard]] std::vector<FoldOutcome> cross_validate(const std::vector<Eigen::MatrixXd>& states,
                                                      std::span<const int> labels,
                                                      const std::vector<std::vector<std::size_t>>& folds,
                                                      const TrainOptions& readout, Execution execution);

}  // namespace ringrc
