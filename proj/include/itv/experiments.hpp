#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "itv/graph.hpp"
#include "itv/loss.hpp"
#include "itv/scm.hpp"

namespace itv {

enum class ExampleId { HiringV1, HiringV2, Music, MusicWithA, Degrees, DegreesCoding };

const char* example_name(ExampleId id);
std::optional<ExampleId> parse_example_id(const std::string& name);
std::vector<ExampleId> all_examples();

struct Example {
    StructuralModel model;
    GroupSpec groups;
    /// Mediator whose path-specific introduced effect the example illustrates.
    std::optional<std::string> mediator;
};

/// Worked examples as fully parameterised models. The model's loss is the
/// example's intended loss.
Example load_example(ExampleId id);

/// Which graphical condition a sampled graph must meet.
enum class CriterionFilter {
    Theorem1,           // itv_criterion
    Theorem2,           // padmissible_itv_criterion
    FailsTheorem1,      // !itv_criterion
    FailsPadmissible,   // !padmissible_extra_condition
    Any,
};

const char* criterion_name(CriterionFilter c);
std::optional<CriterionFilter> parse_criterion(const std::string& name);

struct ExperimentConfig {
    std::size_t n_samples = 1000;
    /// Total nodes including the prediction and utility nodes.
    std::size_t n_nodes = 6;
    double edge_prob = 0.4;
    double dirichlet_alpha = 1.0;
    std::size_t domain_size = 2;
    LossKind loss = LossKind::ZeroOne;
    CriterionFilter criterion = CriterionFilter::Theorem1;
    double itv_threshold = 0.01;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 10'000;
    std::size_t threads = 1;
    InferenceOptions inference;
};

/// Throws PreconditionError for out-of-range fields.
void validate_config(const ExperimentConfig& config);

struct RandomModel {
    StructuralModel model;
    GroupSpec groups;
    std::size_t attempts = 0;
};

/// Samples an SL graph by independent forward edges over a fixed order of
/// chance nodes with random sensitive/target/feature roles, rejecting until
/// `config.criterion` holds, then draws every CPT row from a symmetric
/// Dirichlet and converts to structural form.
RandomModel random_sl_model(const ExperimentConfig& config, std::mt19937_64& rng);

/// Per-sample generator seed.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);
std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index);

struct SampleRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::uint64_t graph_hash = 0;
    /// Minimum and maximum ITV over the optimal policy set.
    double itv = 0.0;
    double itv_max = 0.0;
    std::size_t n_optima = 0;
    bool exceeds = false;
    bool skipped = false;
    std::string skip_reason;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::size_t n_satisfying_criterion = 0;
    std::size_t n_with_itv_above_threshold = 0;
    std::size_t n_skipped = 0;
    double fraction = 0.0;
    std::vector<SampleRecord> records;
};

/// Samples `n_samples` models meeting the criterion, solves each for its
/// optimal policy under the configured loss and counts ITV above threshold.
/// Zero-one models with several optima record the minimum ITV.
ExperimentResult itv_incidence(const ExperimentConfig& config);

/// Worker count from ITV_AUDIT_THREADS, or `fallback` when unset/invalid.
std::size_t threads_from_env(std::size_t fallback = 1);

enum class WitnessCase { DirectedToTarget, CollidersDisjoint };

const char* witness_case_name(WitnessCase c);

struct Witness {
    StructuralModel model;
    GroupSpec groups;
    WitnessCase kind = WitnessCase::DirectedToTarget;
    NodeId feature;
    Path sensitive_path;
    Path target_path;
    double min_itv = 0.0;
    double max_itv = 0.0;
    std::size_t n_optima = 0;
};

/// Parameterises `graph` so that every zero-one optimal policy has positive
/// ITV, for graphs where a requisite feature W is linked to A by a trek and
/// to Y either by a directed path or by a collider path whose colliders have
/// feature descendants, the two paths meeting only at W.
///
/// Throws PreconditionError when the ITV criterion fails and
/// UnsupportedCaseError for graph shapes outside those two cases.
Witness witness_scm(const SLGraph& graph);

}  // namespace itv
