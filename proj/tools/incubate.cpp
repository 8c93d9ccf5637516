// incubate: estimate incubation-time distributions from interval-censored data.
//
//   incubate simulate --model weibull --n 1000 --seed 7 --mode single --out data.csv
//   incubate fit --input data.csv --estimate est.csv --trace trace.txt
//   incubate ci --input data.csv --method wald --points 3:10
//   incubate coverage --model truncexp --n 1000 --reps 200 --seed 3 --out cov.csv
//   incubate compare --n 500 --reps 200 --seed 11 --out box.csv

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "incubation/bootstrap.hpp"
#include "incubation/csv.hpp"
#include "incubation/errors.hpp"
#include "incubation/experiment.hpp"
#include "incubation/inference.hpp"
#include "incubation/npmle.hpp"
#include "incubation/simulate.hpp"

using namespace incubation;

namespace {

struct TruthOptions {
    std::string model = "weibull";
    std::optional<double> a;
    std::optional<double> b;
    int m1 = 15;
    int m2 = 15;

    void add(CLI::App& app)
    {
        app.add_option("--model", model, "Truth family")->check(CLI::IsMember({"weibull", "truncexp"}));
        app.add_option("--shape", a, "Weibull shape a, or exponential scale a");
        app.add_option("--rate", b, "Weibull rate b");
        app.add_option("--m1", m1, "Truncation day of the incubation law")->check(CLI::PositiveNumber);
        app.add_option("--m2", m2, "Maximum exposure day")->check(CLI::PositiveNumber);
    }

    TruthSpec truth() const
    {
        const auto family = parse_family(model);
        TruthSpec spec = family == Family::weibull ? TruthSpec::weibull() : TruthSpec::truncexp();
        spec.m1 = m1;
        if (a) spec.a = *a;
        if (b) spec.b = *b;
        spec.validate();
        return spec;
    }

    ExposureSpec exposure() const
    {
        auto spec = ExposureSpec::uniform(m2);
        if (auto warning = spec.validate(m1); !warning.empty()) std::cerr << "warning: " << warning << '\n';
        return spec;
    }
};

// "3:10" (inclusive range) or "3,5,7".
std::vector<int> parse_points(const std::string& text)
{
    std::vector<int> out;
    auto to_int = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InvalidInputError("bad point list '" + text + "'");
        }
    };
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const int lo = to_int(text.substr(0, colon));
        const int hi = to_int(text.substr(colon + 1));
        if (lo < 1 || hi < lo) throw InvalidInputError("bad point range '" + text + "'");
        for (int t = lo; t <= hi; ++t) out.push_back(t);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int t = to_int(item);
        if (t < 1) throw InvalidInputError("points must be >= 1");
        out.push_back(t);
    }
    if (out.empty()) throw InvalidInputError("empty point list");
    return out;
}

DoublyKernel parse_kernel(const std::string& text)
{
    return text == "atom" ? DoublyKernel::atom : DoublyKernel::day_average;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") std::cout << text;
    else write_file(path, text);
}

Dataset load(const std::string& path, const std::optional<std::string>& mode)
{
    Dataset data = validate_dataset(read_dataset_file(path));
    if (mode && parse_mode(*mode) != data.mode()) {
        throw InvalidInputError("--mode " + *mode + " does not match the file header");
    }
    return data;
}

Grid make_grid(const Dataset& data, std::optional<int> m1)
{
    return candidate_grid(data, m1);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nonparametric incubation-time estimation for interval-censored data"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset");
    TruthOptions sim_truth;
    sim_truth.add(*sim);
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 0;
    std::string sim_mode = "single";
    std::string sim_out = "-";
    std::string sim_truth_out;
    sim->add_option("--n", sim_n, "Number of records")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "Random seed")->required();
    sim->add_option("--mode", sim_mode, "single or double")->check(CLI::IsMember({"single", "double"}));
    sim->add_option("--out", sim_out, "Data CSV path ('-' for stdout)");
    sim->add_option("--truth", sim_truth_out, "Ground-truth CSV path (day,fbar)");

    // fit
    auto* fit = app.add_subcommand("fit", "Compute the NPMLE");
    std::string fit_input;
    std::optional<std::string> fit_mode;
    std::optional<int> fit_m1;
    double fit_tol = 1e-10;
    int fit_max_iter = 500;
    std::optional<int> fit_start;
    std::string fit_kernel = "day-average";
    std::string fit_estimate = "-";
    std::string fit_trace;
    fit->add_option("--input", fit_input, "Data CSV")->required();
    fit->add_option("--mode", fit_mode, "Expected mode")->check(CLI::IsMember({"single", "double"}));
    fit->add_option("--m1", fit_m1, "Extend the grid to m1 + max e");
    fit->add_option("--tol", fit_tol, "Fenchel tolerance");
    fit->add_option("--max-iter", fit_max_iter, "Outer iteration cap");
    fit->add_option("--start", fit_start, "Initial support day");
    fit->add_option("--kernel", fit_kernel, "Doubly weights")->check(CLI::IsMember({"day-average", "atom"}));
    fit->add_option("--estimate", fit_estimate, "Estimate CSV path (day,mass,fbar)");
    fit->add_option("--trace", fit_trace, "Iteration trace path");

    // ci
    auto* ci = app.add_subcommand("ci", "Pointwise confidence intervals for the day-averaged CDF");
    std::string ci_input;
    std::optional<std::string> ci_mode;
    std::optional<int> ci_m1;
    std::string ci_method = "wald";
    bool ci_averaged = false;
    int ci_b = 1000;
    std::optional<std::uint64_t> ci_seed;
    std::string ci_points;
    double ci_level = 0.95;
    unsigned ci_threads = 1;
    std::string ci_kernel = "day-average";
    std::string ci_out = "-";
    ci->add_option("--input", ci_input, "Data CSV")->required();
    ci->add_option("--mode", ci_mode, "Expected mode")->check(CLI::IsMember({"single", "double"}));
    ci->add_option("--m1", ci_m1, "Extend the grid to m1 + max e");
    ci->add_option("--method", ci_method, "wald or bootstrap")->check(CLI::IsMember({"wald", "bootstrap"}));
    ci->add_flag("--fisher-averaged", ci_averaged, "Average the observed Fisher matrix over bootstrap refits");
    ci->add_option("--b", ci_b, "Bootstrap replicates")->check(CLI::PositiveNumber);
    ci->add_option("--seed", ci_seed, "Random seed (bootstrap and Fisher averaging)");
    ci->add_option("--points", ci_points, "Days, as 3:10 or 3,5,7 (default: every grid day)");
    ci->add_option("--level", ci_level, "0.90, 0.95 or 0.99");
    ci->add_option("--threads", ci_threads, "Worker threads (0: all cores)");
    ci->add_option("--kernel", ci_kernel, "Doubly weights")->check(CLI::IsMember({"day-average", "atom"}));
    ci->add_option("--out", ci_out, "Interval CSV path");

    // coverage
    auto* cov = app.add_subcommand("coverage", "Simulated coverage of the interval procedures");
    TruthOptions cov_truth;
    cov_truth.add(*cov);
    CoverageConfig cov_config;
    std::string cov_mode = "single";
    std::string cov_method = "wald";
    std::string cov_points = "4:9";
    std::string cov_kernel = "day-average";
    std::string cov_out = "-";
    std::string cov_reps_out;
    cov->add_option("--n", cov_config.n, "Records per dataset")->check(CLI::PositiveNumber);
    cov->add_option("--reps", cov_config.reps, "Simulated datasets")->check(CLI::PositiveNumber);
    cov->add_option("--seed", cov_config.seed, "Random seed")->required();
    cov->add_option("--mode", cov_mode, "single or double")->check(CLI::IsMember({"single", "double"}));
    cov->add_option("--method", cov_method, "Interval method")
        ->check(CLI::IsMember({"wald", "bootstrap", "wald-averaged"}));
    cov->add_option("--b", cov_config.resamples, "Bootstrap or averaging replicates")->check(CLI::PositiveNumber);
    cov->add_option("--points", cov_points, "Days, as 4:9 or 4,6,8");
    cov->add_option("--level", cov_config.level, "0.90, 0.95 or 0.99");
    cov->add_option("--threads", cov_config.threads, "Worker threads (0: all cores)");
    cov->add_option("--kernel", cov_kernel, "Doubly weights")->check(CLI::IsMember({"day-average", "atom"}));
    cov->add_option("--out", cov_out, "Coverage CSV path");
    cov->add_option("--replicates", cov_reps_out, "Per-replicate CSV path");

    // compare
    auto* cmp = app.add_subcommand("compare", "NPMLE against the truncated-exponential fit at one day");
    TruthOptions cmp_truth;
    cmp_truth.model = "truncexp";
    cmp_truth.add(*cmp);
    ComparisonConfig cmp_config;
    std::string cmp_out = "-";
    cmp->add_option("--n", cmp_config.n, "Records per dataset")->check(CLI::PositiveNumber);
    cmp->add_option("--reps", cmp_config.reps, "Simulated datasets")->check(CLI::PositiveNumber);
    cmp->add_option("--seed", cmp_config.seed, "Random seed")->required();
    cmp->add_option("--day", cmp_config.day, "Day of comparison")->check(CLI::PositiveNumber);
    cmp->add_option("--threads", cmp_config.threads, "Worker threads (0: all cores)");
    cmp->add_option("--out", cmp_out, "Per-replicate CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::invalid_input);
    }

    try {
        if (*sim) {
            const auto truth = sim_truth.truth();
            const auto exposure = sim_truth.exposure();
            const Dataset data = parse_mode(sim_mode) == Mode::single ? draw_singly(sim_n, truth, exposure, sim_seed)
                                                                      : draw_doubly(sim_n, truth, exposure, sim_seed);
            std::ostringstream os;
            write_dataset(os, data);
            emit(sim_out, os.str());
            if (!sim_truth_out.empty()) {
                std::ostringstream ts;
                write_truth(ts, truth, truth.m1);
                write_file(sim_truth_out, ts.str());
            }
            std::cerr << "mode=" << to_string(data.mode()) << " n=" << data.size() << " model=" << to_string(truth.family)
                      << " seed=" << sim_seed << '\n';
        } else if (*fit) {
            const Dataset data = load(fit_input, fit_mode);
            const Grid grid = make_grid(data, fit_m1);
            SolverConfig config;
            config.tol = fit_tol;
            config.max_outer = fit_max_iter;
            config.initial_point = fit_start;
            FitResult result;
            try {
                result = fit_npmle(data, grid, config, parse_kernel(fit_kernel));
            } catch (const NonConvergenceError& e) {
                if (!fit_trace.empty()) write_file(fit_trace, e.trace().to_table());
                throw;
            }
            std::ostringstream os;
            write_estimate(os, result.mass, result.cdf);
            emit(fit_estimate, os.str());
            if (!fit_trace.empty()) write_file(fit_trace, result.trace.to_table());
            const auto& last = result.trace.rows.back();
            std::fprintf(stderr, "mode=%s n=%zu iterations=%d criterion=%.10f support=%zu min_grad=%.3e\n",
                         to_string(data.mode()).c_str(), data.size(), last.iteration, last.criterion,
                         result.mass.size(), result.residuals.min_partial);
        } else if (*ci) {
            const Dataset data = load(ci_input, ci_mode);
            const Grid grid = make_grid(data, ci_m1);
            const auto kernel = parse_kernel(ci_kernel);
            const bool randomized = ci_method == "bootstrap" || ci_averaged;
            if (randomized && !ci_seed) throw InvalidInputError("--seed is required for resampling methods");
            if (ci_averaged && ci_method != "wald") throw InvalidInputError("--fisher-averaged applies to wald only");
            std::vector<int> points;
            if (ci_points.empty()) {
                for (int t = 1; t <= grid.back(); ++t) points.push_back(t);
            } else {
                points = parse_points(ci_points);
            }
            const auto w = build_tallied_weight_matrix<double>(data, grid, kernel);
            const auto result = fit_npmle(w, grid, data.median_symptom_day(), SolverConfig{});
            IntervalTable table;
            if (ci_method == "bootstrap") {
                BootstrapConfig bc;
                bc.b = ci_b;
                bc.seed = *ci_seed;
                bc.points = points;
                bc.level = ci_level;
                bc.threads = ci_threads;
                table = bootstrap_ci(data, grid, result, SolverConfig{}, bc, kernel);
            } else {
                int length = grid.back();
                for (int t : points) length = std::max(length, t);
                FisherResult fisher;
                if (ci_averaged) {
                    const auto averaged = averaged_observed_fisher(data, grid, result.grid_probs, SolverConfig{},
                                                                   FisherAveraging{ci_b, *ci_seed, ci_threads}, kernel);
                    fisher = analyze_fisher(averaged.fisher, result.mass.support(), length);
                    if (averaged.skipped > 0) std::cerr << "skipped " << averaged.skipped << " averaging replicates\n";
                } else {
                    fisher = fisher_analysis(w, grid, result.grid_probs, length);
                }
                table = wald_intervals(result.cdf, fisher.variances, static_cast<double>(data.size()), points, ci_level);
                if (ci_averaged) table.method = "wald-averaged";
                table.pseudo_inverse = fisher.pseudo_inverse;
                if (fisher.pseudo_inverse) std::cerr << "warning: singular Fisher matrix, used pseudo-inverse\n";
            }
            emit(ci_out, table.to_csv());
            std::cerr << "mode=" << to_string(data.mode()) << " method=" << table.method << " level=" << ci_level;
            if (ci_method == "bootstrap") std::cerr << " replicates=" << table.replicates << " failures=" << table.failures;
            std::cerr << '\n';
        } else if (*cov) {
            cov_config.truth = cov_truth.truth();
            cov_config.exposure = cov_truth.exposure();
            cov_config.mode = parse_mode(cov_mode);
            cov_config.method = parse_method(cov_method);
            cov_config.points = parse_points(cov_points);
            cov_config.kernel = parse_kernel(cov_kernel);
            const auto report = coverage_study(cov_config);
            emit(cov_out, report.to_csv());
            if (!cov_reps_out.empty()) write_file(cov_reps_out, report.replicates_csv());
            std::cerr << "mode=" << cov_mode << " method=" << cov_method << " reps=" << cov_config.reps
                      << " n=" << cov_config.n << '\n';
        } else if (*cmp) {
            cmp_config.truth = cmp_truth.truth();
            cmp_config.exposure = cmp_truth.exposure();
            const auto report = comparison_study(cmp_config);
            emit(cmp_out, report.to_csv());
            std::fprintf(stderr, "mode=single day=%d truth=%.6f npmle_mean=%.6f npmle_var=%.3e param_mean=%.6f "
                                 "param_var=%.3e failures=%d\n",
                         report.day, report.truth, mean(report.npmle), sample_variance(report.npmle),
                         mean(report.parametric), sample_variance(report.parametric), report.failures);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::failure);
    }
    return 0;
}
