#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fasticp/dataset.hpp"
#include "fasticp/graphs.hpp"
#include "fasticp/rng.hpp"

namespace fasticp {

enum class Mechanism { linear, nonlinear1, nonlinear2, nonlinear3 };
enum class InterventionKind { perfect, imperfect, noise };

/// Per-edge transforms used by the nonlinear mechanisms.
enum class Basis { identity, relu, signed_sqrt, sine };

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InterventionSpec {
    NodeSet targets;  // always equal to CH(E)
    InterventionKind kind = InterventionKind::perfect;
    std::map<Edge, double> gamma;  // imperfect only, one factor per incoming edge of a target
    double noise_variance_shift = 4.0;
};

/**
 * Generative model: graph, mechanism family, edge parameters and the
 * interventional regime applied when E = 1.
 *
 * Nodes listed in `copy_source` are noisy copies (X' = X + N(0, eps^2)); they
 * are not standardized and always pass their source through linearly.
 */
struct Scm {
    Dag dag;
    Mechanism mechanism = Mechanism::linear;
    std::map<Edge, double> coefficients;
    std::map<Edge, Basis> basis;
    std::vector<double> noise_variance;  // indexed by node id; the E entry is unused
    std::vector<NodeId> copy_source;     // -1 unless the node is a noisy copy
    InterventionSpec intervention;
    std::uint64_t seed = 0;

    bool is_copy(NodeId node) const { return copy_source.at(node) >= 0; }
    /// Covariate column names; copies are named after their source with a trailing '.
    std::vector<std::string> covariate_names() const;
    void validate() const;
};

struct ScmParams {
    int d = 6;
    double p_edge = 0.24;
    int n_int = 1;
    Mechanism mechanism = Mechanism::linear;
    InterventionKind intervention = InterventionKind::perfect;
    /// Literal coefficient support is (-2, 0.5) U (0.5, 2); the symmetric
    /// variant draws from (-2, -0.5) U (0.5, 2).
    bool symmetric_coefficients = false;
    double noise_variance_shift = 4.0;
    int max_attempts = 10000;
};

/// Alternative edge-probability rule 2 / N_int, clipped to 1.
double p_edge_two_over_nint(int n_int);

double draw_coefficient(bool symmetric, Rng& rng);

/// Random graph with role tags; retries until Y has a parent and Y in DE(E).
Dag sample_random_dag(const ScmParams& params, Rng& rng);

/// Fresh coefficients, basis choices and intervention factors for a fixed graph.
Scm draw_mechanism(const Dag& dag, const ScmParams& params, Rng& rng);

Scm sample_random_scm(const ScmParams& params, Rng& rng);

/// Draws n samples; E ~ Bernoulli(0.5) and every non-copy column is
/// standardized with pooled moments right after it is generated.
Dataset simulate(const Scm& scm, int n, Rng& rng);

/// Appends X'_i = X_i + N(0, eps^2) for every covariate and extends the graph
/// with X_i -> X'_i. Copies get ids d..2d-1; Y and E move to 2d and 2d+1.
std::pair<Dataset, Scm> add_noisy_copies(const Dataset& data, const Scm& scm, double epsilon, Rng& rng);

/// Population first and second moments of the standardized linear SCM in
/// each regime (index 0 observational, 1 interventional). Rows/columns are
/// node ids without E.
struct PopulationMoments {
    Eigen::VectorXd mean[2];
    Eigen::MatrixXd cov[2];
    Eigen::VectorXd scale;  // pooled standard deviation of the raw node
    NodeId target = 0;
};

PopulationMoments population_moments(const Scm& scm);

struct PopulationMmse {
    double value = 0.0;
    bool degenerate = false;
};

/// Exact observational-regime MMSE of predicting Y from `subset` (linear only).
PopulationMmse population_mmse(const Scm& scm, const NodeSet& subset);
PopulationMmse population_mmse(const PopulationMoments& moments, const NodeSet& subset);

std::string to_string(Mechanism m);
std::string to_string(InterventionKind k);
Mechanism parse_mechanism(const std::string& text);
InterventionKind parse_intervention(const std::string& text);

}  // namespace fasticp
