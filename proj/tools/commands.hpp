#ifndef PLLI_TOOLS_COMMANDS_HPP
#define PLLI_TOOLS_COMMANDS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plli/plli.hpp"

namespace plli::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;    // bad flags or configuration
inline constexpr int exit_io = 3;
inline constexpr int exit_data = 4;     // input validation and schema problems
inline constexpr int exit_numeric = 5;

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::UnsupportedCombination:
            return exit_usage;
        case ErrorKind::Io:
            return exit_io;
        case ErrorKind::NumericalFailure:
            return exit_numeric;
        default:
            return exit_data;
    }
}

struct FitOptions {
    std::string input;
    std::string target_col = "f";
    std::size_t h = 2;
    std::size_t w = 2;
    std::optional<std::size_t> k;
    std::string select = "mse-f";
    double holdout = 0.2;
    std::string loss = "squared";
    std::string model = "linear";
    std::string algo = "op";
    std::size_t stride = 1;
    std::uint64_t seed = 0;
    std::optional<std::pair<double, double>> clip;
    double ridge = 1e-8;
    std::string out;
    char delimiter = ',';
};

struct EvaluateOptions {
    std::string model;
    std::string input;
    std::optional<std::string> target_col;
    std::optional<std::string> label_col;
    std::optional<std::string> report;
    char delimiter = ',';
};

struct ExplainOptions {
    std::string model;
    int precision = 3;
    std::size_t top = 5;
};

struct Cluster1dOptions {
    std::string input;
    std::optional<std::string> col;
    std::size_t k = 2;
    std::string loss = "squared";
    bool verify = false;
    char delimiter = ',';
};

struct RepresentativesOptions {
    std::string model;
    std::string input;
    std::optional<std::string> target_col;
    int precision = 4;
    char delimiter = ',';
};

struct SynthOptions {
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
};

namespace detail {

inline std::string fixed(double v, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

inline std::string vec(const std::vector<double>& v, int precision) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fixed(v[i], precision);
    return s + "]";
}

inline std::string interval_label(const PlliModel& model, std::size_t r, int precision) {
    const auto& b = model.boundaries;
    if (b.empty()) return "all f";
    if (r == 0) return "f<=" + fixed(b[0], precision);
    if (r == b.size()) return "f>" + fixed(b.back(), precision);
    return fixed(b[r - 1], precision) + "<f<=" + fixed(b[r], precision);
}

inline FitConfig make_config(const FitOptions& o, std::size_t h, std::size_t w) {
    FitConfig cfg;
    cfg.h = h;
    cfg.w = w;
    cfg.loss = io::loss_from_string(o.loss);
    cfg.model_family = io::family_from_string(o.model);
    if (o.clip) cfg.clip = Clip{o.clip->first, o.clip->second};
    cfg.stride = o.stride;
    cfg.seed = o.seed;
    cfg.ridge_epsilon = o.ridge;
    cfg.validate();
    return cfg;
}

inline PlliModel run_algo(const std::string& algo, const Dataset& ds, const FitConfig& cfg) {
    if (algo == "op") return fit_plli(ds, cfg);
    if (algo == "eq") return fit_eq_plli(ds, cfg);
    throw Error(ErrorKind::InvalidConfig, "unknown --algo '" + algo + "' (expected op or eq)");
}

inline Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
    RowMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.dim()));
    std::vector<double> y;
    std::vector<std::string> ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        X.row(static_cast<Eigen::Index>(r)) = ds.features().row(static_cast<Eigen::Index>(rows[r]));
        y.push_back(ds.target()[rows[r]]);
        ids.push_back(ds.row_ids()[rows[r]]);
    }
    return Dataset(std::move(X), std::move(y), ds.column_names(), std::move(ids), ds.target_name());
}

// Cross-validated choice of (H, W) with H * W = K on a seeded holdout split.
inline std::pair<std::size_t, std::size_t> select_factorization(const FitOptions& o, const Dataset& ds,
                                                                std::ostream& out) {
    if (o.select != "mse-f") throw Error(ErrorKind::InvalidConfig, "unknown --select '" + o.select + "'");
    if (!(o.holdout > 0.0 && o.holdout < 1.0)) throw Error(ErrorKind::InvalidConfig, "--holdout must lie in (0, 1)");
    const std::size_t K = *o.k;
    if (K == 0) throw Error(ErrorKind::InvalidConfig, "--k must be a positive integer");

    std::vector<std::size_t> perm(ds.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(mix_seed({o.seed, ds.size(), 0x686f6c646f7574ULL}));
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(o.holdout * static_cast<double>(ds.size()))));
    if (n_hold >= ds.size()) throw Error(ErrorKind::InsufficientData, "holdout leaves no training rows");
    std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
    std::sort(hold.begin(), hold.end());
    std::sort(train.begin(), train.end());
    const Dataset train_ds = subset(ds, train);
    const Dataset hold_ds = subset(ds, hold);

    out << "selection sweep (K=" << K << ", holdout=" << n_hold << " rows)\n";
    out << std::left << std::setw(6) << "H" << std::setw(6) << "W" << "holdout MSE-f\n";
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_mse = 0.0;
    for (std::size_t h = 1; h <= K; ++h) {
        if (K % h != 0) continue;
        const std::size_t w = K / h;
        out << std::left << std::setw(6) << h << std::setw(6) << w;
        if (train_ds.size() < h) {
            out << "skipped (too few rows)\n";
            continue;
        }
        const PlliModel m = run_algo(o.algo, train_ds, make_config(o, h, w));
        const double mse = evaluate(m, hold_ds).mse_f;
        out << io::format_double(mse) << "\n";
        if (!best || mse < best_mse) {
            best = {h, w};
            best_mse = mse;
        }
    }
    if (!best) throw Error(ErrorKind::InsufficientData, "no (H, W) factorization could be fitted");
    out << "selected H=" << best->first << " W=" << best->second << "\n";
    return *best;
}

}  // namespace detail

inline Dataset load_dataset(const std::string& path, const std::string& target, char delimiter) {
    return validate_dataset(io::read_csv(path, delimiter), target);
}

inline int run_fit(const FitOptions& o, std::ostream& out) {
    if (o.input.empty() || o.out.empty()) throw Error(ErrorKind::InvalidConfig, "--input and --out are required");
    const Dataset ds = load_dataset(o.input, o.target_col, o.delimiter);

    std::size_t h = o.h;
    std::size_t w = o.w;
    if (o.k) std::tie(h, w) = detail::select_factorization(o, ds, out);
    const FitConfig cfg = detail::make_config(o, h, w);
    const PlliModel model = detail::run_algo(o.algo, ds, cfg);
    io::save_model(o.out, model);

    out << "algorithm: " << (o.algo == "op" ? "OP-PLLI" : "EQ-PLLI") << "\n";
    out << "H=" << cfg.h << " W=" << cfg.w << " regions=" << model.region_count() << "\n";
    out << "training risk: " << io::format_double(model.training_risk) << "\n";
    out << std::left << std::setw(8) << "region" << std::setw(28) << "interval" << "size\n";
    std::size_t id = 0;
    for (std::size_t r = 0; r < model.intervals.size(); ++r) {
        for (const auto& region : model.intervals[r].regions) {
            out << std::left << std::setw(8) << id++ << std::setw(28) << detail::interval_label(model, r, 4)
                << region.size << "\n";
        }
    }
    return exit_ok;
}

inline int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
    const PlliModel model = io::load_model(o.model);
    const RawTable table = io::read_csv(o.input, o.delimiter);
    const std::string target = o.target_col.value_or(model.target_name);
    const Dataset ds = validate_dataset(io::select_columns(table, model.column_names, target), target);

    std::optional<std::vector<double>> labels;
    if (o.label_col) {
        const auto it = std::find(table.columns.begin(), table.columns.end(), *o.label_col);
        if (it != table.columns.end()) {
            const auto c = static_cast<std::size_t>(it - table.columns.begin());
            labels.emplace();
            for (const auto& row : table.rows) {
                if (!std::isfinite(row[c])) throw Error(ErrorKind::NonFiniteValue, "label column holds a non-finite value");
                labels->push_back(row[c]);
            }
        }
    }
    const EvalReport report = labels ? evaluate(model, ds, std::span<const double>(*labels)) : evaluate(model, ds);

    auto line = [&](const std::string& name, const std::string& value) {
        out << std::left << std::setw(10) << name << value << "\n";
    };
    line("metric", "value");
    line("MSE-f", io::format_double(report.mse_f));
    if (report.mse_p) line("MSE-p", io::format_double(*report.mse_p));
    if (report.r2) line("R2", io::format_double(*report.r2));
    line("n", std::to_string(report.n_eval));

    if (o.report) {
        io::json j;
        j["mse_f"] = report.mse_f;
        j["mse_p"] = report.mse_p ? io::json(*report.mse_p) : io::json(nullptr);
        j["r2"] = report.r2 ? io::json(*report.r2) : io::json(nullptr);
        j["n_eval"] = report.n_eval;
        std::ofstream f(*o.report, std::ios::binary);
        if (!f) throw Error(ErrorKind::Io, "cannot open '" + *o.report + "' for writing");
        f << j.dump(2) << "\n";
    }
    return exit_ok;
}

inline int run_explain(const ExplainOptions& o, std::ostream& out) {
    const PlliModel model = io::load_model(o.model);
    const auto& names = model.column_names;
    const int p = o.precision;

    out << std::left << std::setw(8) << "region" << std::setw(26) << "interval" << std::setw(8) << "size"
        << "centroid";
    for (const auto& n : names) out << "\t" << n;
    out << "\n";

    std::size_t id = 0;
    for (std::size_t r = 0; r < model.intervals.size(); ++r) {
        for (const auto& region : model.intervals[r].regions) {
            const auto imp = feature_importance(region.model, region.feature_stddev);
            std::vector<std::size_t> rank(imp.size());
            for (std::size_t j = 0; j < rank.size(); ++j) rank[j] = j;
            std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
            std::vector<bool> flagged(imp.size(), false);
            for (std::size_t t = 0; t < std::min(o.top, rank.size()); ++t) {
                if (imp[rank[t]] > 0.0) flagged[rank[t]] = true;
            }

            out << std::left << std::setw(8) << id++ << std::setw(26) << detail::interval_label(model, r, p)
                << std::setw(8) << region.size << detail::vec(region.centroid, p);
            for (std::size_t j = 0; j < imp.size(); ++j) out << "\t" << detail::fixed(imp[j], p) << (flagged[j] ? "*" : "");
            out << "\n";
        }
    }

    out << "\nraw |b| per region\n";
    id = 0;
    for (const auto& interval : model.intervals) {
        for (const auto& region : interval.regions) {
            out << std::left << std::setw(8) << id++;
            for (std::size_t j = 0; j < names.size(); ++j) {
                const double b = region.model.coefficients.empty() ? 0.0 : std::abs(region.model.coefficients[j]);
                out << "\t" << detail::fixed(b, p);
            }
            out << "\n";
        }
    }
    return exit_ok;
}

inline int run_cluster1d(const Cluster1dOptions& o, std::ostream& out) {
    const RawTable table = io::read_csv(o.input, o.delimiter);
    std::size_t c = 0;
    if (o.col) {
        c = io::column_index(table, *o.col);
    } else if (table.columns.size() != 1) {
        throw Error(ErrorKind::InvalidConfig, "input has several columns; pick one with --col");
    }
    std::vector<double> values;
    for (const auto& row : table.rows) values.push_back(row[c]);
    const Loss loss = io::loss_from_string(o.loss);

    const Clustering1D result = cluster_1d(values, o.k, loss);
    out << "k: " << result.k() << "\n";
    out << "boundaries:";
    for (std::size_t b : result.boundaries) {
        out << " " << io::format_double(0.5 * (result.sorted_values[b - 1] + result.sorted_values[b]));
    }
    out << "\n";
    out << std::left << std::setw(9) << "cluster" << std::setw(8) << "size" << std::setw(26) << "range" << "center\n";
    for (std::size_t k = 0; k < result.k(); ++k) {
        const std::size_t b = result.cluster_begin(k);
        const std::size_t e = result.cluster_end(k);
        out << std::left << std::setw(9) << k << std::setw(8) << (e - b) << std::setw(26)
            << ("[" + io::format_double(result.sorted_values[b]) + ", " + io::format_double(result.sorted_values[e - 1]) + "]")
            << io::format_double(result.centers[k]) << "\n";
    }
    out << "total cost: " << io::format_double(result.total_cost) << "\n";

    if (o.verify) {
        if (values.size() > 20) {
            out << "oracle skipped (n > 20)\n";
        } else {
            const Clustering1D oracle = brute_force_1d(values, o.k, loss);
            if (std::abs(oracle.total_cost - result.total_cost) < 1e-9) {
                out << "oracle match\n";
            } else {
                out << "oracle mismatch: exhaustive cost " << io::format_double(oracle.total_cost) << "\n";
                return exit_numeric;
            }
        }
    }
    return exit_ok;
}

inline int run_representatives(const RepresentativesOptions& o, std::ostream& out) {
    const PlliModel model = io::load_model(o.model);
    const RawTable table = io::read_csv(o.input, o.delimiter);
    const std::string target = o.target_col.value_or(model.target_name);
    const Dataset ds = validate_dataset(io::select_columns(table, model.column_names, target), target);
    const RepresentativeSet reps = representatives(model, ds);
    const int p = o.precision;

    out << std::left << std::setw(8) << "region" << std::setw(10) << "row" << std::setw(14) << "distance"
        << std::setw(14) << "f" << "centroid\n";
    for (const auto& rep : reps.records) {
        out << std::left << std::setw(8) << rep.region_id << std::setw(10) << rep.nearest_row_id << std::setw(14)
            << detail::fixed(rep.nearest_distance, p) << std::setw(14) << detail::fixed(rep.black_box_value, p)
            << detail::vec(rep.centroid, p) << "\n";
    }
    auto cov = [&](const char* name, const std::optional<double>& v) {
        out << std::left << std::setw(24) << name << (v ? io::format_double(*v) : std::string("absent")) << "\n";
    };
    cov("coverage features", reps.coverage_features);
    cov("coverage predictions", reps.coverage_predictions);
    cov("coverage importances", reps.coverage_importances);
    return exit_ok;
}

/// x1, x2 ~ N(0, 1); f = (x1 + x2)^2.
inline RawTable synth_table(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RawTable table;
    table.columns = {"x1", "x2", "f"};
    table.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = normal(rng);
        const double x2 = normal(rng);
        table.rows.push_back({x1, x2, (x1 + x2) * (x1 + x2)});
    }
    return table;
}

inline int run_synth(const SynthOptions& o, std::ostream& out) {
    if (o.out.empty()) throw Error(ErrorKind::InvalidConfig, "--out is required");
    if (o.n == 0) throw Error(ErrorKind::InvalidConfig, "--n must be positive");
    io::write_csv(o.out, synth_table(o.n, o.seed));
    out << "wrote " << o.n << " rows to " << o.out << "\n";
    return exit_ok;
}

}  // namespace plli::cli

#endif  // PLLI_TOOLS_COMMANDS_HPP
