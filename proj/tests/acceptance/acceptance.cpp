// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "test_support.hpp"

using namespace plli;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Fitted models from suites 4 and 6, kept for the reconstruction check.
struct FittedCase {
    Dataset ds;
    FitConfig cfg;
    PlliModel model;
};
std::vector<FittedCase> fitted_cases;

Outcome oracle_optimality() {
    const auto start = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t K = 2 + seed % 3;
        const std::size_t n = K + seed % (13 - K);
        const auto v = plli::testing::uniform_values(n, 10'000 + seed);
        worst = std::max(worst, std::abs(cluster_1d(v, K).total_cost - brute_force_1d(v, K).total_cost));
    }
    const double secs = seconds_since(start);
    std::ostringstream d;
    d << "200 instances, max |diff| " << worst << ", " << secs << " s";
    return {worst <= 1e-9 && secs < 10.0, d.str()};
}

Outcome erm_optimality() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 1 + seed % 12;
        const std::size_t H = 1 + (seed / 12) % std::min<std::size_t>(4, n);
        auto v = plli::testing::uniform_values(n, 20'000 + seed);
        const SortedDataset sd = sort_by_target(plli::testing::dataset_from_values(v));
        std::sort(v.begin(), v.end());
        const FitConfig cfg{.h = H, .w = 1, .model_family = ModelFamily::constant};
        const double dp = compute_value_index(sd, cfg).value(n, H);
        worst = std::max(worst, std::abs(dp - plli::testing::exhaustive_partition_cost(v, H, Loss::squared)));
    }
    std::ostringstream d;
    d << "100 instances, max |diff| " << worst;
    return {worst <= 1e-9, d.str()};
}

Outcome midpoint_property() {
    const auto start = Clock::now();
    std::size_t failures = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto v = plli::testing::uniform_values(2 + seed % 60, 30'000 + seed);
        const std::size_t K = 1 + seed % std::min<std::size_t>(6, v.size());
        if (!check_midpoint_property(cluster_1d(v, K), v)) ++failures;
    }
    const double secs = seconds_since(start);
    std::ostringstream d;
    d << "500 instances, " << failures << " violations, " << secs << " s";
    return {failures == 0 && secs < 5.0, d.str()};
}

Outcome op_dominates_eq() {
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Dataset ds = plli::testing::make_dataset(200, 3, 40'000 + seed, [](auto x) {
            return x[0] * x[0] + std::sin(2.0 * x[1]) + x[1] * x[2];
        });
        for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 1}, {2, 2}}) {
            const FitConfig cfg{.h = h, .w = w, .seed = seed};
            PlliModel op = fit_plli(ds, cfg);
            const double op_cost = training_cost(op, ds);
            const double eq_cost = training_cost(fit_eq_plli(ds, cfg), ds);
            worst = std::max(worst, op_cost - eq_cost);
            if (op_cost > eq_cost + 1e-9) ++failures;
            fitted_cases.push_back({ds, cfg, std::move(op)});
        }
    }
    std::ostringstream d;
    d << "100 fits, max (OP - EQ) " << worst << ", " << failures << " violations";
    return {failures == 0, d.str()};
}

Outcome stride_contract() {
    bool identical = true;
    std::size_t violations = 0;
    std::size_t instances = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset ds = plli::testing::make_dataset(80, 2, 50'000 + seed, [](auto x) { return x[0] * x[1] + x[0]; });
        const SortedDataset sd = sort_by_target(ds);
        for (auto [h, w, family] : {std::tuple{std::size_t{3}, std::size_t{1}, ModelFamily::constant},
                                    std::tuple{std::size_t{3}, std::size_t{1}, ModelFamily::linear},
                                    std::tuple{std::size_t{2}, std::size_t{2}, ModelFamily::linear}}) {
            const FitConfig exact{.h = h, .w = w, .model_family = family, .seed = seed};
            FitConfig one = exact;
            one.stride = 1;
            const ValueIndexTables base = compute_value_index(sd, exact, TableScope::full);
            identical = identical && base == compute_value_index(sd, one, TableScope::full);
            identical = identical && io::dump_model(fit_plli(ds, exact)) == io::dump_model(fit_plli(ds, one));
            for (std::size_t stride : {2u, 5u, 10u}) {
                FitConfig coarse = exact;
                coarse.stride = stride;
                ++instances;
                if (compute_value_index(sd, coarse).value(80, h) < base.value(80, h)) ++violations;
            }
        }
    }
    std::ostringstream d;
    d << "stride 1 " << (identical ? "bit-identical" : "DIFFERS") << ", " << violations << "/" << instances
      << " coarse strides below exact";
    return {identical && violations == 0, d.str()};
}

Outcome synthetic_fidelity() {
    const auto start = Clock::now();
    const RawTable table = cli::synth_table(1000, 2024);
    const Dataset ds = validate_dataset(table, "f");
    const FitConfig cfg{.h = 2, .w = 2, .model_family = ModelFamily::linear, .seed = 2024};
    PlliModel model = fit_plli(ds, cfg);
    const double plli_mse = evaluate(model, ds).mse_f;
    const double global_mse = fit_linear(ds.features(), ds.target(), cfg.ridge_epsilon).cost / 1000.0;
    const double secs = seconds_since(start);
    fitted_cases.push_back({ds, cfg, std::move(model)});
    std::ostringstream d;
    d << "OP-PLLI MSE-f " << plli_mse << ", global linear " << global_mse << ", ratio " << global_mse / plli_mse
      << ", " << secs << " s";
    return {plli_mse * 10.0 <= global_mse && secs < 60.0, d.str()};
}

Outcome reconstruction_consistency() {
    double worst = 0.0;
    for (const auto& c : fitted_cases) {
        const SortedDataset sd = sort_by_target(c.ds);
        const double v = compute_value_index(sd, c.cfg).value(c.ds.size(), c.cfg.h);
        const double risk = training_cost(c.model, c.ds) / static_cast<double>(c.ds.size());
        worst = std::max(worst, std::abs(risk - v / static_cast<double>(c.ds.size())));
    }
    std::ostringstream d;
    d << fitted_cases.size() << " models, max |risk - V/n| " << worst;
    return {!fitted_cases.empty() && worst <= 1e-9, d.str()};
}

Outcome fast_path() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto v = plli::testing::uniform_values(50, 60'000 + seed, -10.0, 10.0);
        std::sort(v.begin(), v.end());
        const PrefixOracle oracle(v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i; j < v.size(); ++j) {
                const double direct = fit_constant(std::span<const double>(v).subspan(i, j - i + 1), Loss::squared).cost;
                worst = std::max(worst, std::abs(oracle.query(i, j) - direct));
            }
        }
    }
    const Dataset big = plli::testing::make_dataset(2000, 3, 61'000, [](auto x) { return x[0] + x[1] * x[2]; });
    const auto start = Clock::now();
    const PlliModel m = fit_plli(big, FitConfig{.h = 4, .w = 1, .model_family = ModelFamily::constant});
    const double secs = seconds_since(start);
    std::ostringstream d;
    d << "max |oracle - direct| " << worst << ", n=2000 H=4 fit " << secs << " s";
    return {worst <= 1e-9 && secs < 5.0 && m.region_count() == 4, d.str()};
}

Outcome least_squares_orthogonality() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset ds = plli::testing::make_dataset(50, 5, 70'000 + seed, [](auto x) {
            return 2.0 * x[0] - x[3] + std::cos(x[1]) * x[2] + x[4] * x[4];
        });
        const FitResult fit = fit_linear(ds.features(), ds.target(), 0.0);
        Eigen::VectorXd res(50);
        for (std::size_t r = 0; r < 50; ++r) {
            res(static_cast<Eigen::Index>(r)) = ds.target()[r] - predict_local(fit.model, ds.row(r));
        }
        worst = std::max(worst, std::abs(res.sum()));
        for (Eigen::Index c = 0; c < 5; ++c) worst = std::max(worst, std::abs(ds.features().col(c).dot(res)));
    }
    std::ostringstream d;
    d << "20 regressions, max |X^T r| " << worst;
    return {worst <= 1e-8, d.str()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PLLI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome fit_determinism() {
    const fs::path dir = fs::temp_directory_path() / ("plli_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string data = (dir / "synth.csv").string();
    const std::string a = (dir / "a.json").string();
    const std::string b = (dir / "b.json").string();
    const std::string flags = " --input " + data + " --h 2 --w 3 --seed 17 --out ";
    bool ok = run_cli("synth --n 600 --seed 3 --out " + data) == 0;
    ok = ok && run_cli("fit" + flags + a) == 0;
    ok = ok && run_cli("fit" + flags + b) == 0;
    const std::string first = slurp(a);
    const bool same = ok && !first.empty() && first == slurp(b);
    fs::remove_all(dir);
    return {same, same ? "two runs produced identical " + std::to_string(first.size()) + "-byte model files"
                       : "model files differ or the CLI failed"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 oracle optimality of cluster_1d", oracle_optimality},
        {"2 ERM optimality of the range DP", erm_optimality},
        {"3 midpoint property", midpoint_property},
        {"4 OP dominates EQ", op_dominates_eq},
        {"5 stride contract", stride_contract},
        {"6 synthetic fidelity", synthetic_fidelity},
        {"7 reconstruction consistency", reconstruction_consistency},
        {"8 prefix-oracle fast path", fast_path},
        {"9 least-squares orthogonality", least_squares_orthogonality},
        {"10 fit determinism", fit_determinism},
    };

    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")" << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
