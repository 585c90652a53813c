#ifndef MFREG_EXPERIMENT_HPP
#define MFREG_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mfreg/config.hpp"
#include "mfreg/data_io.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/metrics.hpp"
#include "mfreg/model.hpp"
#include "mfreg/trainer.hpp"

namespace mfreg {

// One grid sweep: train every (framework, learning rate, regularization
// magnitude) cell on the same train/test split and evaluate MAE and DME on
// the held-out half. The magnitude axis means: beta for global_scalar, the
// constant per-vector coefficient for per_vector_scalar, and the B/G
// initialization value for vector_dot (which has no constant coefficient).
struct GridSpec {
    std::vector<double> learning_rates;
    std::vector<double> reg_magnitudes;
    std::vector<FrameworkKind> frameworks;
    double split_ratio = 0.8;
    std::uint64_t split_seed = 42;
    Hyperparams base;
    std::size_t k_top = 10;
    bool clamp = true;

    void validate() const {
        if (learning_rates.empty()) throw contract_error("grid: learning_rates is empty");
        if (reg_magnitudes.empty()) throw contract_error("grid: reg_magnitudes is empty");
        if (frameworks.empty()) throw contract_error("grid: frameworks is empty");
        for (double lr : learning_rates)
            if (!(lr > 0.0)) throw contract_error("grid: learning rates must be > 0");
        for (double mag : reg_magnitudes)
            if (!(mag >= 0.0)) throw contract_error("grid: regularization magnitudes must be >= 0");
        if (!(split_ratio > 0.0 && split_ratio < 1.0))
            throw contract_error("grid: split ratio must be in (0,1)");
        if (base.k < 1 || base.epochs < 1) throw contract_error("grid: invalid hyperparams");
    }
};

struct SurfaceRow {
    FrameworkKind framework;
    double learning_rate = 0.0;
    double reg_magnitude = 0.0;
    double mae = std::numeric_limits<double>::quiet_NaN();
    double dme = std::numeric_limits<double>::quiet_NaN();
    bool ok = false; // false = training diverged
};

struct SurfaceTable {
    std::vector<SurfaceRow> rows; // sorted by (framework name, lr, mag)

    std::optional<SurfaceRow> best_row(FrameworkKind f) const {
        std::optional<SurfaceRow> best;
        for (const SurfaceRow& r : rows) {
            if (r.framework != f || !r.ok) continue;
            if (!best || r.mae < best->mae) best = r;
        }
        return best;
    }
};

namespace detail {

inline Hyperparams cell_hyperparams(const GridSpec& spec, double lr, double mag) {
    Hyperparams h = spec.base;
    h.eta_feat = lr;
    h.eta_reg = lr;
    h.init_reg_value = mag; // consumed only under vector_dot
    return h;
}

inline RegularizationFramework cell_framework(FrameworkKind kind, double mag, std::size_t M,
                                              std::size_t N) {
    switch (kind) {
        case FrameworkKind::none: return RegularizationFramework::none();
        case FrameworkKind::global_scalar: return RegularizationFramework::global_scalar(mag);
        case FrameworkKind::per_vector_scalar:
            return RegularizationFramework::per_vector_scalar_constant(M, N, mag);
        case FrameworkKind::vector_dot: return RegularizationFramework::vector_dot();
    }
    return RegularizationFramework::none();
}

} // namespace detail

// Runs the sweep over a pre-split pair. Cells may run on up to `threads`
// workers; the table is assembled in a fixed order, so the result is
// independent of the thread count.
inline SurfaceTable run_grid(const GridSpec& spec, const SplitPair& pair,
                             std::size_t threads = 1) {
    spec.validate();
    if (threads < 1) threads = 1;

    std::vector<FrameworkKind> fws = spec.frameworks;
    std::sort(fws.begin(), fws.end(), [](FrameworkKind a, FrameworkKind b) {
        return std::string_view(framework_name(a)) < std::string_view(framework_name(b));
    });
    fws.erase(std::unique(fws.begin(), fws.end()), fws.end());
    std::vector<double> lrs = spec.learning_rates;
    std::sort(lrs.begin(), lrs.end());
    std::vector<double> mags = spec.reg_magnitudes;
    std::sort(mags.begin(), mags.end());

    SurfaceTable table;
    for (FrameworkKind f : fws)
        for (double lr : lrs)
            for (double mag : mags) {
                SurfaceRow r;
                r.framework = f;
                r.learning_rate = lr;
                r.reg_magnitude = mag;
                table.rows.push_back(r);
            }

    const std::size_t M = pair.train.num_users();
    const std::size_t N = pair.train.num_items();
    const ColdStartInfo cold = ColdStartInfo::from(pair.train);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= table.rows.size()) return;
            SurfaceRow& r = table.rows[idx];
            Hyperparams h = detail::cell_hyperparams(spec, r.learning_rate, r.reg_magnitude);
            try {
                TrainResult tr =
                    train(pair.train, h, detail::cell_framework(r.framework, r.reg_magnitude, M, N));
                r.mae = mae(tr.model, pair.test, spec.clamp, &cold);
                try {
                    r.dme = degree_matthew_effect(tr.model, pair.train, spec.k_top);
                } catch (const insufficient_data_error&) {
                    r.dme = std::numeric_limits<double>::quiet_NaN();
                }
                r.ok = true;
            } catch (const divergence_error&) {
                r.ok = false;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return table;
}

// Loads nothing; splits the dataset with the spec's (ratio, seed) and sweeps.
inline SurfaceTable run_grid(const GridSpec& spec, const RatingsDataset& data,
                             std::size_t threads = 1) {
    spec.validate();
    SplitPair pair = split(data, spec.split_ratio, spec.split_seed);
    return run_grid(spec, pair, threads);
}

namespace detail {

inline std::string surface_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail

// CSV with one row per cell, deterministic order and formatting; diverged
// cells leave mae/dme empty.
inline void write_surface_csv(const SurfaceTable& table, std::ostream& os) {
    if (table.rows.empty()) throw contract_error("export_surface: table is empty");
    os << "framework,learning_rate,reg_magnitude,mae,dme,status\n";
    for (const SurfaceRow& r : table.rows) {
        os << framework_name(r.framework) << ',' << detail::surface_cell(r.learning_rate) << ','
           << detail::surface_cell(r.reg_magnitude) << ',';
        if (r.ok)
            os << detail::surface_cell(r.mae) << ',' << detail::surface_cell(r.dme) << ",ok\n";
        else
            os << ",,diverged\n";
    }
}

// Companion gnuplot nonuniform-matrix file for one (framework, metric)
// surface: first row lists the magnitude axis, each following row is a
// learning rate followed by the metric values. Diverged cells print nan.
inline void write_surface_matrix(const SurfaceTable& table, FrameworkKind f, bool use_mae,
                                 std::ostream& os) {
    std::vector<double> lrs, mags;
    for (const SurfaceRow& r : table.rows) {
        if (r.framework != f) continue;
        if (lrs.empty() || lrs.back() != r.learning_rate) lrs.push_back(r.learning_rate);
        if (std::find(mags.begin(), mags.end(), r.reg_magnitude) == mags.end())
            mags.push_back(r.reg_magnitude);
    }
    os << mags.size() + 1;
    for (double m : mags) os << ' ' << detail::surface_cell(m);
    os << '\n';
    for (double lr : lrs) {
        os << detail::surface_cell(lr);
        for (double m : mags) {
            double v = std::numeric_limits<double>::quiet_NaN();
            for (const SurfaceRow& r : table.rows)
                if (r.framework == f && r.learning_rate == lr && r.reg_magnitude == m)
                    v = r.ok ? (use_mae ? r.mae : r.dme) : std::numeric_limits<double>::quiet_NaN();
            os << ' ' << detail::surface_cell(v);
        }
        os << '\n';
    }
}

// Writes `<path>` as the CSV plus `<stem>_<framework>_{mae,dme}.dat`
// companions next to it.
inline void export_surface(const SurfaceTable& table, const std::string& csv_path) {
    if (table.rows.empty()) throw contract_error("export_surface: table is empty");
    std::ofstream os(csv_path);
    if (!os) throw io_error("cannot write surface CSV: " + csv_path);
    write_surface_csv(table, os);

    std::string stem = csv_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
    std::vector<FrameworkKind> fws;
    for (const SurfaceRow& r : table.rows)
        if (std::find(fws.begin(), fws.end(), r.framework) == fws.end()) fws.push_back(r.framework);
    for (FrameworkKind f : fws) {
        for (bool use_mae : {true, false}) {
            std::string p =
                stem + "_" + framework_name(f) + (use_mae ? "_mae.dat" : "_dme.dat");
            std::ofstream ms(p);
            if (!ms) throw io_error("cannot write surface matrix: " + p);
            write_surface_matrix(table, f, use_mae, ms);
        }
    }
}

// Builds a GridSpec from the flat config keys:
//   dataset.path, dataset.preset, split.ratio, split.seed,
//   grid.learning_rates, grid.reg_magnitudes, grid.frameworks,
//   train.k, train.epochs, train.mode, metrics.k_top, metrics.clamp
struct GridConfig {
    GridSpec spec;
    std::string dataset_path;
    std::string dataset_preset = "canonical";
};

inline GridConfig grid_config_from(const Config& cfg) {
    GridConfig g;
    g.dataset_path = cfg.require_string("dataset.path");
    g.dataset_preset = cfg.get_string("dataset.preset", "canonical");

    g.spec.split_ratio = cfg.get_double("split.ratio", 0.8);
    g.spec.split_seed = static_cast<std::uint64_t>(cfg.get_int("split.seed", 42));

    g.spec.learning_rates = cfg.get_double_list("grid.learning_rates");
    if (g.spec.learning_rates.empty())
        g.spec.learning_rates = {0.001, 0.003, 0.01, 0.03, 0.1};
    g.spec.reg_magnitudes = cfg.get_double_list("grid.reg_magnitudes");
    if (g.spec.reg_magnitudes.empty()) g.spec.reg_magnitudes = {0.0, 0.001, 0.01, 0.1, 1.0};

    std::vector<std::string> fw_names = cfg.get_string_list("grid.frameworks");
    if (fw_names.empty()) fw_names = {"global_scalar", "vector_dot"};
    for (const std::string& name : fw_names) {
        auto f = framework_from_name(name);
        if (!f) throw contract_error("config: unknown framework '" + name + "'");
        g.spec.frameworks.push_back(*f);
    }

    g.spec.base.k = static_cast<std::size_t>(cfg.get_int("train.k", 10));
    g.spec.base.epochs = static_cast<std::size_t>(cfg.get_int("train.epochs", 200));
    g.spec.base.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 42));
    std::string mode = cfg.get_string("train.mode", "sgd");
    auto tm = train_mode_from_name(mode);
    if (!tm) throw contract_error("config: unknown train.mode '" + mode + "'");
    g.spec.base.mode = *tm;
    g.spec.base.early_stop_tol = cfg.get_double("train.early_stop_tol", 1e-5);

    g.spec.k_top = static_cast<std::size_t>(cfg.get_int("metrics.k_top", 10));
    g.spec.clamp = cfg.get_bool("metrics.clamp", true);
    return g;
}

inline RatingsDataset load_dataset_preset(const std::string& path, const std::string& preset) {
    if (preset == "canonical") return load_canonical(path);
    if (preset == "movielens") return load_ratings_table(path, TableSchema::movielens());
    if (preset == "comoda") return load_ratings_table(path, TableSchema::comoda());
    throw contract_error("unknown dataset preset '" + preset + "'");
}

} // namespace mfreg

#endif
