// mfreg command-line front end.
//
//   mfreg synth     emit a seeded synthetic ratings dataset
//   mfreg train     train one model, print the loss trace and eval report
//   mfreg eval      MAE / DME for a saved model
//   mfreg diagnose  implied-coefficient spread report
//   mfreg grid      grid search from a config file, write surface tables

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfreg/mfreg.hpp"

namespace {

using namespace mfreg;

struct GlobalOpts {
    std::uint64_t seed = 42;
    std::string config_path;
    std::string out_dir = ".";
    std::size_t threads = 1;
};

struct SchemaOpts {
    std::string preset = "canonical";
    std::string delimiter;
    bool no_header = false;
    int user_col = -1;
    int item_col = -1;
    int rating_col = -1;
    double r_min = std::numeric_limits<double>::quiet_NaN();
    double r_max = std::numeric_limits<double>::quiet_NaN();

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "dataset preset: canonical|movielens|comoda")
            ->check(CLI::IsMember({"canonical", "movielens", "comoda"}));
        cmd->add_option("--delimiter", delimiter, "field delimiter (single character)");
        cmd->add_flag("--no-header", no_header, "table has no header row");
        cmd->add_option("--user-col", user_col, "user column index");
        cmd->add_option("--item-col", item_col, "item column index");
        cmd->add_option("--rating-col", rating_col, "rating column index");
        cmd->add_option("--r-min", r_min, "lower rating bound");
        cmd->add_option("--r-max", r_max, "upper rating bound");
    }

    RatingsDataset load(const std::string& path, LoadStats* stats = nullptr) const {
        if (preset == "canonical") return load_canonical(path);
        TableSchema s = preset == "movielens" ? TableSchema::movielens() : TableSchema::comoda();
        if (!delimiter.empty()) s.delimiter = delimiter[0];
        if (no_header) s.has_header = false;
        if (user_col >= 0) s.user_col = static_cast<std::size_t>(user_col);
        if (item_col >= 0) s.item_col = static_cast<std::size_t>(item_col);
        if (rating_col >= 0) s.rating_col = static_cast<std::size_t>(rating_col);
        if (!std::isnan(r_min)) s.r_min = r_min;
        if (!std::isnan(r_max)) s.r_max = r_max;
        return load_ratings_table(path, s, stats);
    }
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    return (std::filesystem::path(g.out_dir) / name).string();
}

RegularizationFramework framework_for(FrameworkKind kind, double mag, std::size_t M,
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

int run_synth(const GlobalOpts& g, std::size_t M, std::size_t N, std::size_t k_true,
              double density, double noise_std, const std::string& file) {
    RatingsDataset d = synthetic(M, N, k_true, density, noise_std, g.seed);
    std::string path = file.empty() ? out_path(g, "synthetic.csv") : file;
    save_canonical(d, path);
    std::cout << "wrote " << path << " (" << d.num_users() << " users, " << d.num_items()
              << " items, " << d.size() << " ratings)\n";
    return 0;
}

struct TrainOpts {
    std::string data_path;
    SchemaOpts schema;
    std::string framework = "vector_dot";
    std::size_t k = 10;
    std::size_t epochs = 200;
    std::string mode = "sgd";
    double lr = 0.01;
    double reg_lr = -1.0; // default: same as lr
    double reg_mag = 0.01;
    double split_ratio = 0.8;
    std::size_t k_top = 10;
    bool no_clamp = false;
    bool quiet_trace = false;
    std::string save_model_path;
};

int run_train(const GlobalOpts& g, const TrainOpts& o) {
    auto kind = framework_from_name(o.framework);
    if (!kind) {
        std::cerr << "unknown framework: " << o.framework << "\n";
        return 1;
    }
    auto mode = train_mode_from_name(o.mode);
    if (!mode) {
        std::cerr << "unknown train mode: " << o.mode << "\n";
        return 1;
    }

    RatingsDataset data = o.schema.load(o.data_path);
    SplitPair pair = split(data, o.split_ratio, g.seed);

    Hyperparams h;
    h.k = o.k;
    h.epochs = o.epochs;
    h.eta_feat = o.lr;
    h.eta_reg = o.reg_lr >= 0.0 ? o.reg_lr : o.lr;
    h.seed = g.seed;
    h.mode = *mode;
    h.init_reg_value = o.reg_mag;
    h.clamp_predictions = !o.no_clamp;
    h.validate();

    RegularizationFramework fw =
        framework_for(*kind, o.reg_mag, data.num_users(), data.num_items());
    TrainResult res = train(pair.train, h, std::move(fw));

    if (!o.quiet_trace) {
        std::printf("epoch,fit,penalty,total\n");
        for (std::size_t e = 0; e < res.trace.size(); ++e)
            std::printf("%zu,%.10g,%.10g,%.10g\n", e + 1, res.trace[e].fit, res.trace[e].penalty,
                        res.trace[e].total);
    }
    std::printf("epochs_run=%zu converged=%s\n", res.epochs_run, res.converged ? "true" : "false");

    EvalReport report = evaluate(res.model, pair.train, pair.test, !o.no_clamp, o.k_top);
    std::printf("test mae=%.6f dme=%.6f n=%zu (dme = rank-frequency slope difference)\n",
                report.mae, report.dme, report.num_test_ratings);

    if (!o.save_model_path.empty()) {
        save_model(res.model, o.save_model_path);
        std::cout << "saved model to " << o.save_model_path << "\n";
    }
    return 0;
}

int run_eval(const GlobalOpts& g, const std::string& data_path, const SchemaOpts& schema,
             const std::string& train_path, const std::string& model_path, std::size_t k_top,
             bool no_clamp) {
    (void)g;
    FactorModel model = load_model(model_path);
    RatingsDataset test = schema.load(data_path);
    RatingsDataset train_data = train_path.empty() ? test : schema.load(train_path);
    EvalReport report = evaluate(model, train_data, test, !no_clamp, k_top);
    write_eval_csv(report, std::cout);
    std::cout << "# dme is the rank-frequency slope difference (exposure - popularity)\n";
    return 0;
}

int run_diagnose(const GlobalOpts& g, const std::string& data_path, const SchemaOpts& schema,
                 const std::string& model_path, bool paper_literal, const std::string& csv_out,
                 const TrainOpts& train_opts) {
    RatingsDataset data = schema.load(data_path);
    FactorModel model;
    if (!model_path.empty()) {
        model = load_model(model_path);
    } else {
        auto kind = framework_from_name(train_opts.framework);
        if (!kind) {
            std::cerr << "unknown framework: " << train_opts.framework << "\n";
            return 1;
        }
        Hyperparams h;
        h.k = train_opts.k;
        h.epochs = train_opts.epochs;
        h.eta_feat = train_opts.lr;
        h.eta_reg = train_opts.reg_lr >= 0.0 ? train_opts.reg_lr : train_opts.lr;
        h.seed = g.seed;
        h.mode = *train_mode_from_name(train_opts.mode);
        h.init_reg_value = train_opts.reg_mag;
        h.validate();
        TrainResult res = train(data, h,
                                framework_for(*kind, train_opts.reg_mag, data.num_users(),
                                              data.num_items()));
        model = std::move(res.model);
    }

    SpreadReport report = implied_beta_spread(model, data, paper_literal);
    std::printf("implied beta over %zu users (%zu excluded): mean=%.6g std=%.6g min=%.6g max=%.6g",
                report.num_users, report.num_excluded, report.mean, report.std_dev, report.min,
                report.max);
    if (report.cv_defined)
        std::printf(" cv=%.6g\n", report.coefficient_of_variation);
    else
        std::printf(" cv=undefined\n");

    std::string path = csv_out.empty() ? out_path(g, "implied_beta.csv") : csv_out;
    std::ofstream os(path);
    if (!os) throw io_error("cannot write report: " + path);
    write_spread_csv(report, os);
    std::cout << "wrote " << path << "\n";

    if (model.framework.kind == FrameworkKind::vector_dot) {
        // Squared-norm identity: the implied ||beta_i||^2 next to the actual
        // one; the gap measures distance from stationarity in u_i.
        std::string np = path;
        if (np.size() > 4 && np.substr(np.size() - 4) == ".csv") np.resize(np.size() - 4);
        np += "_norm_sq.csv";
        std::ofstream ns(np);
        if (!ns) throw io_error("cannot write report: " + np);
        ns << "user_index,implied_norm_sq,actual_norm_sq\n";
        double gap_sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < data.num_users(); ++i) {
            if (data.user_degree(i) == 0) continue;
            if (sign(dot(model.U.row(i), model.B.row(i))) == 0) continue;
            double implied = implied_beta_norm_sq(model, data, i);
            double actual = dot(model.B.row(i), model.B.row(i));
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, implied, actual);
            ns << buf;
            gap_sum += std::abs(implied - actual);
            ++n;
        }
        if (n > 0)
            std::printf("norm-sq identity over %zu users: mean |implied - actual| = %.6g\n", n,
                        gap_sum / static_cast<double>(n));
        std::cout << "wrote " << np << "\n";
    }
    return 0;
}

int run_grid_cmd(const GlobalOpts& g) {
    if (g.config_path.empty()) {
        std::cerr << "grid requires --config <path>\n";
        return 1;
    }
    if (!std::filesystem::exists(g.config_path)) {
        std::cerr << "config file not found: " << g.config_path << "\n";
        return 1;
    }
    Config cfg = Config::parse_file(g.config_path);
    GridConfig gc = grid_config_from(cfg);
    // The global --seed fills any seed the config leaves unset.
    if (!cfg.has("split.seed")) gc.spec.split_seed = g.seed;
    if (!cfg.has("train.seed")) gc.spec.base.seed = g.seed;
    RatingsDataset data = load_dataset_preset(gc.dataset_path, gc.dataset_preset);
    SurfaceTable table = run_grid(gc.spec, data, g.threads);

    std::string csv = out_path(g, "surface.csv");
    export_surface(table, csv);
    std::cout << "wrote " << csv << "\n";
    for (FrameworkKind f : gc.spec.frameworks) {
        auto best = table.best_row(f);
        if (best)
            std::printf("best %-17s lr=%-8g mag=%-8g mae=%.6f dme=%.6f\n", framework_name(f),
                        best->learning_rate, best->reg_magnitude, best->mae, best->dme);
        else
            std::printf("best %-17s all cells diverged\n", framework_name(f));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-factorization recommender with vector-valued regularization"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed");
    app.add_option("--config", g.config_path, "config file (used by grid)");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads for grid cells");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "emit a synthetic dataset");
    std::size_t sM = 50, sN = 40, sk = 5;
    double sdensity = 0.2, snoise = 0.1;
    std::string sfile;
    synth_cmd->add_option("--num-users", sM, "users");
    synth_cmd->add_option("--num-items", sN, "items");
    synth_cmd->add_option("--k-true", sk, "ground-truth rank");
    synth_cmd->add_option("--density", sdensity, "keep probability per cell");
    synth_cmd->add_option("--noise-std", snoise, "Gaussian noise level");
    synth_cmd->add_option("--file", sfile, "output file (default <out>/synthetic.csv)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train one model");
    TrainOpts t;
    train_cmd->add_option("--data", t.data_path, "ratings table")->required();
    t.schema.add_flags(train_cmd);
    train_cmd->add_option("--framework", t.framework,
                          "none|global_scalar|per_vector_scalar|vector_dot");
    train_cmd->add_option("--k", t.k, "latent dimension");
    train_cmd->add_option("--epochs", t.epochs, "max epochs");
    train_cmd->add_option("--mode", t.mode, "sgd|batch_gd");
    train_cmd->add_option("--lr", t.lr, "learning rate for U,V");
    train_cmd->add_option("--reg-lr", t.reg_lr, "learning rate for B,G (default: --lr)");
    train_cmd->add_option("--reg-mag", t.reg_mag,
                          "beta / per-vector constant / vector_dot init value");
    train_cmd->add_option("--split-ratio", t.split_ratio, "train fraction");
    train_cmd->add_option("--k-top", t.k_top, "top-k cutoff for DME");
    train_cmd->add_flag("--no-clamp", t.no_clamp, "evaluate unclamped predictions");
    train_cmd->add_flag("--quiet-trace", t.quiet_trace, "suppress the per-epoch loss trace");
    train_cmd->add_option("--save-model", t.save_model_path, "write the final model here");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
    std::string e_data, e_train, e_model;
    std::size_t e_ktop = 10;
    bool e_noclamp = false;
    SchemaOpts e_schema;
    eval_cmd->add_option("--data", e_data, "test ratings table")->required();
    eval_cmd->add_option("--train-data", e_train,
                         "training table for popularity/cold-start (default: --data)");
    eval_cmd->add_option("--model", e_model, "saved model file")->required();
    e_schema.add_flags(eval_cmd);
    eval_cmd->add_option("--k-top", e_ktop, "top-k cutoff for DME");
    eval_cmd->add_flag("--no-clamp", e_noclamp, "evaluate unclamped predictions");

    // diagnose
    auto* diag_cmd = app.add_subcommand("diagnose", "implied-coefficient spread report");
    std::string d_data, d_model, d_csv;
    bool d_literal = false;
    SchemaOpts d_schema;
    TrainOpts d_train;
    diag_cmd->add_option("--data", d_data, "ratings table")->required();
    diag_cmd->add_option("--model", d_model, "saved model (omit to train fresh)");
    d_schema.add_flags(diag_cmd);
    diag_cmd->add_flag("--paper-literal", d_literal,
                       "report the positive-sign form of the implied coefficient");
    diag_cmd->add_option("--csv", d_csv, "report path (default <out>/implied_beta.csv)");
    diag_cmd->add_option("--framework", d_train.framework, "framework when training fresh");
    diag_cmd->add_option("--k", d_train.k, "latent dimension when training fresh");
    diag_cmd->add_option("--epochs", d_train.epochs, "epochs when training fresh");
    diag_cmd->add_option("--lr", d_train.lr, "learning rate when training fresh");
    diag_cmd->add_option("--mode", d_train.mode, "sgd|batch_gd when training fresh");

    // grid
    app.add_subcommand("grid", "grid search from --config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return run_synth(g, sM, sN, sk, sdensity, snoise, sfile);
        if (train_cmd->parsed()) return run_train(g, t);
        if (eval_cmd->parsed()) return run_eval(g, e_data, e_schema, e_train, e_model, e_ktop,
                                                e_noclamp);
        if (diag_cmd->parsed())
            return run_diagnose(g, d_data, d_schema, d_model, d_literal, d_csv, d_train);
        return run_grid_cmd(g);
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
