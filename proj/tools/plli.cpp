#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

std::pair<double, double> parse_clip(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw plli::Error(plli::ErrorKind::InvalidConfig, "--clip expects lo,hi");
    const double lo = plli::io::parse_double(text.substr(0, comma), 0, "--clip");
    const double hi = plli::io::parse_double(text.substr(comma + 1), 0, "--clip");
    return {lo, hi};
}

char parse_delimiter(const std::string& text) {
    if (text == "\\t" || text == "tab") return '\t';
    if (text.size() != 1) throw plli::Error(plli::ErrorKind::InvalidConfig, "--delimiter must be a single character");
    return text[0];
}

}  // namespace

int main(int argc, char** argv) {
    using namespace plli::cli;

    CLI::App app{"Optimal piecewise local-linear surrogates of black-box predictors"};
    app.require_subcommand(1);

    std::string delimiter = ",";
    std::string clip_text;

    FitOptions fit;
    std::size_t k_value = 0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a surrogate model and write it as JSON");
    fit_cmd->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    fit_cmd->add_option("--input", fit.input, "Training CSV with header")->required();
    fit_cmd->add_option("--target-col", fit.target_col, "Black-box value column")->capture_default_str();
    fit_cmd->add_option("--h", fit.h, "Number of range intervals H")->capture_default_str();
    fit_cmd->add_option("--w", fit.w, "k-means regions per interval W")->capture_default_str();
    auto* k_opt = fit_cmd->add_option("--k", k_value, "Region budget K; sweeps every H*W=K and keeps the best");
    fit_cmd->add_option("--select", fit.select, "Selection metric for --k")->check(CLI::IsMember({"mse-f"}))->capture_default_str();
    fit_cmd->add_option("--holdout", fit.holdout, "Holdout fraction for --k")->capture_default_str();
    fit_cmd->add_option("--loss", fit.loss)->check(CLI::IsMember({"squared", "absolute"}))->capture_default_str();
    fit_cmd->add_option("--model", fit.model)->check(CLI::IsMember({"linear", "constant"}))->capture_default_str();
    fit_cmd->add_option("--algo", fit.algo, "op: optimal DP, eq: equal quantiles")->check(CLI::IsMember({"op", "eq"}))->capture_default_str();
    fit_cmd->add_option("--stride", fit.stride, "Split candidate stride; 1 is exact")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed)->capture_default_str();
    fit_cmd->add_option("--clip", clip_text, "Clip linear predictions to lo,hi");
    fit_cmd->add_option("--ridge", fit.ridge, "Ridge term for singular least-squares systems")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Model file to write")->required();
    fit_cmd->add_option("--delimiter", delimiter)->capture_default_str();

    EvaluateOptions eval;
    std::string eval_target, eval_label, eval_report;
    auto* eval_cmd = app.add_subcommand("evaluate", "Report MSE-f, MSE-p and R^2 of a model on a CSV");
    eval_cmd->add_option("--model", eval.model)->required();
    eval_cmd->add_option("--input", eval.input)->required();
    auto* eval_target_opt = eval_cmd->add_option("--target-col", eval_target, "Defaults to the model's target column");
    auto* eval_label_opt = eval_cmd->add_option("--label-col", eval_label, "Ground-truth label column");
    auto* eval_report_opt = eval_cmd->add_option("--report", eval_report, "Write a JSON report here");
    eval_cmd->add_option("--delimiter", delimiter)->capture_default_str();

    ExplainOptions explain;
    auto* explain_cmd = app.add_subcommand("explain", "Region-wise feature importances");
    explain_cmd->add_option("--model", explain.model)->required();
    explain_cmd->add_option("--precision", explain.precision)->capture_default_str();
    explain_cmd->add_option("--top", explain.top, "Flag this many top features per region")->capture_default_str();

    Cluster1dOptions c1d;
    std::string c1d_col;
    auto* c1d_cmd = app.add_subcommand("cluster1d", "Optimal contiguous 1-D clustering");
    c1d_cmd->add_option("--input", c1d.input)->required();
    auto* c1d_col_opt = c1d_cmd->add_option("--col", c1d_col);
    c1d_cmd->add_option("--k", c1d.k)->required();
    c1d_cmd->add_option("--loss", c1d.loss)->check(CLI::IsMember({"squared", "absolute"}))->capture_default_str();
    c1d_cmd->add_flag("--verify", c1d.verify, "Cross-check against exhaustive search (n <= 20)");
    c1d_cmd->add_option("--delimiter", delimiter)->capture_default_str();

    RepresentativesOptions reps;
    std::string reps_target;
    auto* reps_cmd = app.add_subcommand("representatives", "Representative rows per region and coverage");
    reps_cmd->add_option("--model", reps.model)->required();
    reps_cmd->add_option("--input", reps.input)->required();
    auto* reps_target_opt = reps_cmd->add_option("--target-col", reps_target);
    reps_cmd->add_option("--precision", reps.precision)->capture_default_str();
    reps_cmd->add_option("--delimiter", delimiter)->capture_default_str();

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic (x1 + x2)^2 dataset");
    synth_cmd->add_option("--n", synth.n)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        if (fit_cmd->parsed()) {
            if (k_opt->count() > 0) fit.k = k_value;
            if (!clip_text.empty()) fit.clip = parse_clip(clip_text);
            fit.delimiter = parse_delimiter(delimiter);
            return run_fit(fit, std::cout);
        }
        if (eval_cmd->parsed()) {
            if (eval_target_opt->count() > 0) eval.target_col = eval_target;
            if (eval_label_opt->count() > 0) eval.label_col = eval_label;
            if (eval_report_opt->count() > 0) eval.report = eval_report;
            eval.delimiter = parse_delimiter(delimiter);
            return run_evaluate(eval, std::cout);
        }
        if (explain_cmd->parsed()) return run_explain(explain, std::cout);
        if (c1d_cmd->parsed()) {
            if (c1d_col_opt->count() > 0) c1d.col = c1d_col;
            c1d.delimiter = parse_delimiter(delimiter);
            return run_cluster1d(c1d, std::cout);
        }
        if (reps_cmd->parsed()) {
            if (reps_target_opt->count() > 0) reps.target_col = reps_target;
            reps.delimiter = parse_delimiter(delimiter);
            return run_representatives(reps, std::cout);
        }
        if (synth_cmd->parsed()) return run_synth(synth, std::cout);
    } catch (const plli::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_usage;
}
