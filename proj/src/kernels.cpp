#include "ringrc/kernels.hpp"

#include "ringrc/errors.hpp"

#include <exception>
#include <fmt/format.h>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ringrc {

namespace {

// Runs body(i) for i in [0, n). Exceptions are rethrown after the loop
// (lowest index first, so the reported error does not depend on scheduling).
template <class Body>
void for_each_index(std::size_t n, Execution execution, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

int worker_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<SweepResult> sweep_capacities(const SweepSettings& settings, const BinarySeries& series,
                                          std::span<const SweepPoint> points, Execution execution) {
    std::vector<SweepResult> results(points.size());
    for_each_index(points.size(), execution, [&](std::size_t i) {
        SweepResult& r = results[i];
        r.point = points[i];
        try {
            RingParams params = settings.ring;
            params.gain_db = points[i].gain_db;
            const OutputMatrix out =
                run_reservoir_bits(series.bits, points[i].interval, settings.samples, params,
                                   settings.noise_seed, ReservoirOptions{settings.preroll_time});
            r.stm = task_capacity(BinaryTask::stm, out, series, settings.split, settings.capacity);
            r.pc = task_capacity(BinaryTask::pc, out, series, settings.split, settings.capacity);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });
    return results;
}

std::vector<Eigen::MatrixXd> corpus_features(const Corpus& corpus, Execution execution) {
    std::vector<Eigen::MatrixXd> out(corpus.size());
    for_each_index(corpus.size(), execution, [&](std::size_t j) {
        out[j] = digit_features(corpus[j]);  // thread-local analyzer
    });
    return out;
}

std::vector<Eigen::MatrixXd> corpus_inputs(const std::vector<Eigen::MatrixXd>& features, const MaskMatrix& mask,
                                           NormalizationScope scope, Execution execution) {
    std::vector<Eigen::MatrixXd> out(features.size());
    for_each_index(features.size(), execution,
                   [&](std::size_t j) { out[j] = masked_inputs(features[j], mask, scope); });
    return out;
}

std::vector<std::vector<std::size_t>> make_folds(const Corpus& corpus, std::size_t folds) {
    if (folds < 2) throw ConfigError("need at least two folds");
    std::vector<std::vector<std::size_t>> out(folds);
    for (std::size_t j = 0; j < corpus.size(); ++j) {
        const int u = corpus[j].utterance;
        if (u < 0 || static_cast<std::size_t>(u) >= folds) {
            throw InputError(fmt::format("utterance {} of {} outside fold range 0..{}", u, corpus[j].source,
                                         folds - 1));
        }
        out[static_cast<std::size_t>(u)].push_back(j);
    }
    return out;
}

std::vector<FoldOutcome> cross_validate(const std::vector<Eigen::MatrixXd>& states, std::span<const int> labels,
                                        const std::vector<std::vector<std::size_t>>& folds,
                                        const TrainOptions& readout, Execution execution) {
    if (states.size() != labels.size()) throw InputError("states and labels differ in length");
    if (states.empty()) throw InputError("no digits to cross-validate");
    const Eigen::Index dim = states.front().rows();

    std::vector<FoldOutcome> outcomes(folds.size());
    for_each_index(folds.size(), execution, [&](std::size_t f) {
        std::vector<char> is_test(states.size(), 0);
        for (std::size_t j : folds[f]) is_test[j] = 1;

        Eigen::Index train_cols = 0;
        for (std::size_t j = 0; j < states.size(); ++j)
            if (!is_test[j]) train_cols += states[j].cols();
        Eigen::MatrixXd V(dim, train_cols);
        std::vector<int> unit_labels;
        unit_labels.reserve(static_cast<std::size_t>(train_cols));
        Eigen::Index c = 0;
        for (std::size_t j = 0; j < states.size(); ++j) {
            if (is_test[j]) continue;
            V.middleCols(c, states[j].cols()) = states[j];
            c += states[j].cols();
            unit_labels.insert(unit_labels.end(), static_cast<std::size_t>(states[j].cols()), labels[j]);
        }
        const WeightMatrix W = train(V, one_hot(unit_labels), readout);

        FoldOutcome& out = outcomes[f];
        out.confusion = Eigen::MatrixXi::Zero(10, 10);
        std::size_t correct = 0;
        for (std::size_t j : folds[f]) {
            const int predicted = vote(predict(W, states[j]));
            out.predictions.push_back(predicted);
            out.confusion(labels[j], predicted) += 1;
            if (predicted == labels[j]) ++correct;
        }
        out.accuracy = folds[f].empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(folds[f].size());
    });
    return outcomes;
}

}  // namespace ringrc
