#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distlab/config.hpp"
#include "distlab/manifold.hpp"
#include "distlab/report.hpp"

namespace distlab {

/// Run independent indices on up to `jobs` threads (serial when jobs <= 1).
/// Results must be written to per-index slots; assembly order is fixed, so
/// output is identical for every jobs value.
void parallel_for(int jobs, int count, const std::function<void(int)>& fn);

// ---- MCS sweep -------------------------------------------------------------

/// Nested family Q_rho on a fixed 1-D grid: mass rho spread uniformly over
/// a shared sub-region of supp(P), mass 1-rho over a disjoint region.
struct McsSweepConfig {
    std::vector<double> rho_grid;
    int shared_cells = 8;
    int disjoint_cells = 8;
    int alpha_points = 20;
    bool negative_control = false; // deliberately breaks monotonicity
    bool emit_alpha_hat = false;   // adds a restricted-capacity estimate column
    int alpha_hat_samples = 256;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    static McsSweepConfig from_config(const ConfigFile& cfg);
};

ExperimentReport run_mcs_sweep(const McsSweepConfig& cfg);

// ---- Translation density ---------------------------------------------------

/// Positively aligned pair + translation schedule: draws offsets in the
/// delta-ball, verifies the overlap collapse under refinement and the
/// translation bound on W2.
struct TranslationDensityConfig {
    std::vector<std::string> pairs = {"collinear_segments_2d", "collinear_segments_3d",
                                      "diagonal_segments_2d"};
    std::optional<std::pair<ManifoldSpec, ManifoldSpec>> custom_pair;
    double epsilon = 0.5;
    std::vector<double> deltas = {1e-2, 1e-3, 1e-4};
    int offset_seeds = 10;
    int sample_count = 64;
    std::vector<double> refine_resolutions = {1e-2, 1e-3, 1e-4};
    double tau_factor = 0.1; // tau = tau_factor * resolution (minimum sound value)
    int max_retries = 64;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    static TranslationDensityConfig from_config(const ConfigFile& cfg);
};

/// Built-in positively aligned manifold pairs by name.
std::pair<ManifoldSpec, ManifoldSpec> translation_pair(const std::string& name);

ExperimentReport run_translation_density(const TranslationDensityConfig& cfg);

// ---- Gradient audit --------------------------------------------------------

struct GradientAuditConfig {
    int ot_sample_count = 50;
    int ot_ambient_dim = 2;
    int ot_latent_dim = 2;
    int ot_seeds = 20;
    int grid_cells = 4096;
    double grid_lo = -8.0;
    double grid_hi = 9.0;
    int grid_draws = 20;
    int mixture_components = 2;
    int identity_draws = 10;
    double h_rel = 1e-5;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    static GradientAuditConfig from_config(const ConfigFile& cfg);
};

/// Formula codes used in the audit table (see README): 0 w2sq, 1 w1/l1,
/// 2 w1/euclidean, 3 jsd, 4 neg_log_d.
ExperimentReport run_gradient_audit(const GradientAuditConfig& cfg);

// ---- Toy mode-collapse training ---------------------------------------------

struct ToyTrainingConfig {
    int modes = 4;
    double segment_lo = -3.0;
    double segment_hi = 3.0;
    double mode_spread = 0.02; // parameter-space sigma of each target mode
    int sample_count = 48;
    std::vector<std::string> losses = {"w2sq", "w1", "jsd", "neg_log_d"};
    int iterations = 150;
    double learning_rate = 0.02;
    int seeds = 5;
    bool init_at_target = false; // start transport-loss runs from an exact match
    int grid_cells = 2048;
    double grid_pad = 8.0;         // generous tails so wandering generators keep the quadrature valid
    double smooth_sigma_cells = 2.0; // target smoothing, keeps p_r strictly positive on the wide box
    double alignment_tau = 0.05;
    // Closed-form single-atom check.
    double atom_eta = 0.1;
    int atom_steps = 20;
    double atom_theta0 = 1.0;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    static ToyTrainingConfig from_config(const ConfigFile& cfg);
};

/// Loss codes in the trajectory table: 0 w2sq, 1 w1, 2 jsd, 3 neg_log_d.
ExperimentReport run_toy_training(const ToyTrainingConfig& cfg);

} // namespace distlab
