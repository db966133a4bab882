#include "lprep/cli.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "lprep/amplitude_amp.h"
#include "lprep/dicke.h"
#include "lprep/excitation_ladder.h"
#include "lprep/excitation_measure.h"
#include "lprep/verify.h"
#include "lprep/xx_chain.h"
#include "lprep/cli_report.h"

namespace lprep::cli {

namespace {

const double kSqrt8Pi = std::sqrt(8 * std::numbers::pi);

json complex_json(Complex z) {
    return json::array({z.real(), z.imag()});
}

std::vector<std::size_t> parse_index_list(const std::string &text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty()) {
            continue;
        }
        const auto dots = item.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoul(item));
                continue;
            }
            const std::size_t lo = std::stoul(item.substr(0, dots));
            const std::size_t hi = std::stoul(item.substr(dots + 2));
            if (hi < lo) {
                throw std::invalid_argument("empty range " + item);
            }
            for (std::size_t v = lo; v <= hi; ++v) {
                out.push_back(v);
            }
        } catch (const std::logic_error &) {
            throw std::invalid_argument("bad integer list entry '" + item + "'");
        }
    }
    return out;
}

struct Common {
    std::uint64_t seed = 1;
    std::string output;
    std::string format;

    void add_to(CLI::App &sub, std::string default_format = "json") {
        format = std::move(default_format);
        sub.add_option("--seed", seed, "RNG seed")->capture_default_str();
        sub.add_option("--output", output, "Write the report here instead of standard output");
        sub.add_option("--format", format, "Report format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    }
    void fill(json &config) const {
        config["seed"] = seed;
        config["format"] = format;
        config["output"] = output.empty() ? json(nullptr) : json(output);
    }
};

std::optional<unsigned> optional_ell(int ell) {
    return ell > 0 ? std::optional<unsigned>(static_cast<unsigned>(ell)) : std::nullopt;
}

json dicke_result(const PreparationReport &r) {
    return json{{"success", r.success},
                {"ell", r.ell},
                {"ell_formula", number(r.ell_formula)},
                {"exact_regime", r.exact_regime},
                {"repetitions_used", r.repetitions_used},
                {"expected_repetitions", r.success_probability > 0 ? number(1 / r.success_probability) : json()}};
}

void fill_preparation(Report &rep, const PreparationReport &r, bool simulated) {
    rep.infidelity = simulated && r.success ? std::optional<double>(r.infidelity) : std::nullopt;
    rep.success_probability = r.success_probability;
    rep.ledger = r.ledger;
    rep.checks = r.bound_checks;
    rep.result = dicke_result(r);
    if (simulated) {
        rep.measurement_trace = json{{"outcomes", r.trial_outcomes}};
    }
}

// ---------------------------------------------------------------------------------------------
// Subcommands. Each one registers its flags and turns them into a report.

struct Command {
    virtual ~Command() = default;
    Common common;
    CLI::App *app = nullptr;
    virtual Report run() = 0;
};

struct PrepareDicke : Command {
    unsigned n = 0, m = 0;
    double eps = 1e-3;
    int ell = 0;
    std::size_t reps = 1000;
    std::string kick = "fast";
    bool parallel = false, postselect = false, ledger_only = false;

    explicit PrepareDicke(CLI::App &root) {
        app = root.add_subcommand("prepare-dicke", "Repeat-until-success Dicke preparation by excitation measurement");
        app->add_option("--n", n, "Sites")->required()->check(CLI::Range(1u, 1000000u));
        app->add_option("--m", m, "Excitations")->required();
        app->add_option("--eps", eps, "Target infidelity")->capture_default_str();
        app->add_option("--ell", ell, "Override the number of measured bits (0 = formula)");
        app->add_option("--reps", reps, "Maximum repetitions")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--kick", kick, "Phase-kick execution")->check(CLI::IsMember({"fast", "protocol"}))
            ->capture_default_str();
        app->add_flag("--parallel", parallel, "Constant-depth measurement with fanned-out copies");
        app->add_flag("--postselect", postselect, "Force the accepting readout in a single attempt");
        app->add_flag("--ledger-only", ledger_only, "Resources and analytic probabilities only");
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "prepare-dicke";
        rep.config = json{{"n", n}, {"m", m}, {"eps", eps}, {"ell", ell > 0 ? json(ell) : json()},
                          {"reps", reps}, {"kick", kick}, {"parallel", parallel}, {"postselect", postselect},
                          {"ledger_only", ledger_only}};
        common.fill(rep.config);
        DickeParams params{n, m, eps, optional_ell(ell)};
        params.validate();
        if (parallel && kick != "fast") {
            throw std::invalid_argument("--kick applies to the sequential measurement only");
        }
        if (parallel && postselect) {
            throw std::invalid_argument("--postselect is not available with --parallel");
        }
        const KickMode mode = kick == "fast" ? KickMode::Fast : KickMode::Protocol;
        PreparationReport r;
        if (ledger_only) {
            r = dicke_ledger_report(params, parallel);
        } else if (postselect) {
            r = prepare_dicke_postselected(params, mode);
        } else {
            Rng rng(common.seed);
            r = parallel ? prepare_dicke_parallel(params, reps, rng) : prepare_dicke(params, reps, rng, mode);
        }
        fill_preparation(rep, r, !ledger_only);
        return rep;
    }
};

struct PrepareW : Command {
    unsigned n = 0;
    double delta = 0.1;
    std::size_t reps = 1000;

    explicit PrepareW(CLI::App &root) {
        app = root.add_subcommand("prepare-w", "W state from a weak product state and one parity measurement");
        app->add_option("--n", n, "Sites")->required()->check(CLI::Range(2u, 1000000u));
        app->add_option("--delta", delta, "Excitation budget of the product state")->capture_default_str();
        app->add_option("--reps", reps, "Maximum repetitions")->capture_default_str()->check(CLI::PositiveNumber);
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "prepare-w";
        rep.config = json{{"n", n}, {"delta", delta}, {"reps", reps}};
        common.fill(rep.config);
        Rng rng(common.seed);
        const auto r = prepare_w_parity(n, delta, reps, rng);
        fill_preparation(rep, r, true);
        rep.result["success_probability_closed_form"] = number(w_parity_success_probability(n, delta));
        return rep;
    }
};

struct ImprovedDicke : Command {
    unsigned n = 0, m = 0;
    double delta = 0.01;
    int ell = 0;

    explicit ImprovedDicke(CLI::App &root) {
        app = root.add_subcommand("improved-dicke", "Deterministic Dicke preparation by approximate amplification");
        app->add_option("--n", n, "Sites")->required()->check(CLI::Range(1u, 64u));
        app->add_option("--m", m, "Excitations")->required();
        app->add_option("--delta", delta, "Accuracy parameter")->capture_default_str();
        app->add_option("--ell", ell, "Override the number of measured bits (0 = formula)");
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "improved-dicke";
        rep.config = json{{"n", n}, {"m", m}, {"delta", delta}, {"ell", ell > 0 ? json(ell) : json()}};
        common.fill(rep.config);
        ImprovedDickeParams params{n, m, delta, optional_ell(ell)};
        const auto r = improved_dicke(params);
        rep.infidelity = r.infidelity;
        rep.success_probability = 1.0;
        rep.ledger = r.ledger;
        rep.checks = r.bound_checks;
        rep.result = json{{"iterations", r.iterations},
                          {"iteration_bound", number(r.iteration_bound)},
                          {"ell", r.ell},
                          {"ell_formula", number(r.ell_formula)},
                          {"exact_regime", r.exact_regime},
                          {"eps1", number(r.eps1)},
                          {"eps2", number(r.eps2)},
                          {"residual_budget", number(r.residual_budget)}};
        return rep;
    }
};

struct PrepareXX : Command {
    std::size_t n = 0;
    std::string modes;
    std::string jw = "protocol";
    std::string circuit = "compressed";

    explicit PrepareXX(CLI::App &root) {
        app = root.add_subcommand("prepare-xx", "Eigenstate of the open XX chain from occupied single-particle modes");
        app->add_option("--n", n, "Sites")->required()->check(CLI::Range(std::size_t{1}, std::size_t{26}));
        app->add_option("--modes", modes, "Occupied mode indices, 0-based by ascending energy (e.g. 0,1)")
            ->required();
        app->add_option("--jw", jw, "Jordan-Wigner string implementation")
            ->check(CLI::IsMember({"direct", "protocol"}))
            ->capture_default_str();
        app->add_option("--circuit", circuit, "Rotation circuit layout")
            ->check(CLI::IsMember({"compressed", "palindrome"}))
            ->capture_default_str();
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "prepare-xx";
        const auto indices = parse_index_list(modes);
        rep.config = json{{"n", n}, {"modes", indices}, {"jw", jw}, {"circuit", circuit}};
        common.fill(rep.config);
        XXOptions options;
        options.jw = jw == "direct" ? JWMode::Direct : JWMode::Protocol;
        options.circuit = circuit == "compressed" ? XXCircuit::Compressed : XXCircuit::Palindrome;
        Rng rng(common.seed);
        const auto r = prepare_xx_eigenstate(n, indices, rng, options);
        rep.infidelity = r.infidelity;
        rep.success_probability = 1.0;
        rep.ledger = r.ledger;
        rep.checks = r.bound_checks;
        rep.result = json{{"mode_indices", r.mode_indices},
                          {"energy", number(r.energy)},
                          {"eigen_residual", number(r.eigen_residual)},
                          {"sector_weight", number(r.sector_weight)},
                          {"eigenspace_infidelity", number(r.eigenspace_infidelity)},
                          {"construction_infidelity", number(r.construction_infidelity)},
                          {"compressed_depth_formula", xx_compressed_depth(n, indices.size())}};
        return rep;
    }
};

struct RunLadder : Command {
    std::size_t n = 0, m = 1;
    double theta = 0.1, overlap = 0;
    std::string family = "uniform";
    std::string coeffs;
    std::size_t retries = 200, restarts = 20;
    std::string measure = "circuit";

    explicit RunLadder(CLI::App &root) {
        app = root.add_subcommand("run-ladder", "Add excitations one at a time by small rotations and measurement");
        app->add_option("--n", n, "Sites (taken from the file for --family file)");
        app->add_option("--m", m, "Number of modes")->capture_default_str();
        app->add_option("--theta", theta, "Rotation angle")->capture_default_str();
        app->add_option("--family", family, "Mode coefficients")
            ->check(CLI::IsMember({"uniform", "sine", "random", "file"}))
            ->capture_default_str();
        app->add_option("--overlap", overlap, "Overlap between successive random modes")->capture_default_str();
        app->add_option("--coeffs", coeffs, "Coefficient file for --family file");
        app->add_option("--retries", retries, "Retries per step")->capture_default_str();
        app->add_option("--restarts", restarts, "Restarts")->capture_default_str();
        app->add_option("--measure", measure, "Excitation-number measurement")
            ->check(CLI::IsMember({"circuit", "projector"}))
            ->capture_default_str();
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "run-ladder";
        LadderSpec spec;
        if (family == "file") {
            if (coeffs.empty()) {
                throw std::invalid_argument("--family file needs --coeffs");
            }
            spec.modes = read_modes_file(coeffs);
            if (spec.modes.empty()) {
                throw std::invalid_argument("coefficient file has no modes");
            }
            if (n != 0 && n != spec.modes[0].size()) {
                throw std::invalid_argument("--n disagrees with the coefficient file");
            }
            n = spec.modes[0].size();
        } else {
            if (n == 0 || m == 0 || m > n) {
                throw std::invalid_argument("run-ladder needs 1 <= M <= N");
            }
            if (family == "uniform") {
                spec.modes = uniform_modes(n, m);
            } else if (family == "sine") {
                spec.modes = sine_modes(n, m);
            } else {
                Rng mode_rng(common.seed, 1);
                spec.modes = random_modes(n, m, mode_rng, overlap);
            }
        }
        spec.n = n;
        spec.theta = theta;
        spec.max_retries = retries;
        spec.max_restarts = restarts;
        spec.measure = measure == "circuit" ? LadderMeasure::Circuit : LadderMeasure::Projector;
        rep.config = json{{"n", n}, {"m", spec.m()}, {"theta", theta}, {"family", family},
                          {"overlap", overlap}, {"coeffs", coeffs.empty() ? json() : json(coeffs)},
                          {"retries", retries}, {"restarts", restarts}, {"measure", measure}};
        common.fill(rep.config);
        spec.validate();

        Rng rng(common.seed);
        const auto trace = run_ladder(spec, rng);
        rep.infidelity = trace.success ? std::optional<double>(trace.infidelity) : std::nullopt;
        rep.ledger = trace.ledger;
        json attempts = json::array();
        double product = 1;
        for (const auto &a : trace.attempts) {
            attempts.push_back(json{{"step", a.step}, {"restart", a.restart}, {"k", a.k},
                                    {"probability", number(a.probability)}});
            product *= a.probability;
        }
        rep.measurement_trace = json{{"attempts", attempts}};
        rep.checks.push_back(BoundCheck::at_most("|product of branch probabilities - path weight|",
                                                 std::abs(product - trace.path_weight), 1e-10));
        if (trace.success && spec.m() == 1 && family == "uniform") {
            rep.checks.push_back(BoundCheck::at_most("single-mode infidelity <= 1e-10", trace.infidelity, 1e-10));
        }
        rep.result = json{{"success", trace.success},
                          {"attempts", trace.attempts.size()},
                          {"restarts", trace.restarts},
                          {"attempts_per_step", trace.attempts_per_step},
                          {"orthonormality_deviation", number(trace.orthonormality_deviation)},
                          {"path_weight", number(trace.path_weight)}};
        return rep;
    }
};

struct VerifyV : Command {
    std::size_t n = 4, trials = 50;

    explicit VerifyV(CLI::App &root) {
        app = root.add_subcommand("verify-v", "Exhaustive branch check of the constant-depth controlled product");
        app->add_option("--n", n, "Target sites")->capture_default_str()->check(CLI::Range(1, 8));
        app->add_option("--trials", trials, "Random specs")->capture_default_str();
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "verify-v";
        rep.config = json{{"n", n}, {"trials", trials}};
        common.fill(rep.config);
        Rng rng(common.seed);
        const auto v = verify_v_protocol(n, trials, rng);
        rep.checks = {BoundCheck::at_least("min branch fidelity >= 1 - 1e-10", v.min_fidelity, 1 - 1e-10),
                      BoundCheck::at_most("max ancilla leak <= 1e-10", v.max_ancilla_leak, 1e-10),
                      BoundCheck::at_most("|sum of branch weights - 1| <= 1e-10", v.max_weight_defect, 1e-10),
                      BoundCheck::at_most("max depth <= 6", double(v.max_depth), 6),
                      BoundCheck::at_least("min depth >= 6", double(v.min_depth), 6)};
        rep.infidelity = 1 - v.min_fidelity;
        rep.success_probability = 1.0;
        rep.result = json{{"branches", v.branches},
                          {"min_fidelity", number(v.min_fidelity)},
                          {"max_ancilla_leak", number(v.max_ancilla_leak)},
                          {"max_weight_defect", number(v.max_weight_defect)},
                          {"min_depth", v.min_depth},
                          {"max_depth", v.max_depth}};
        return rep;
    }
};

struct VerifyMeasure : Command {
    std::size_t n = 4, trials = 20;
    unsigned ell = 0;

    explicit VerifyMeasure(CLI::App &root) {
        app = root.add_subcommand("verify-measure", "Modular excitation measurement against the projector reference");
        app->add_option("--n", n, "Sites")->capture_default_str()->check(CLI::Range(1, 16));
        app->add_option("--ell", ell, "Measured bits (0 = every admissible value)")->capture_default_str();
        app->add_option("--trials", trials, "Random states per ell")->capture_default_str();
        common.add_to(*app);
    }

    Report run() override {
        Report rep;
        rep.subcommand = "verify-measure";
        rep.config = json{{"n", n}, {"ell", ell}, {"trials", trials}};
        common.fill(rep.config);
        std::vector<unsigned> ells;
        if (ell == 0) {
            for (unsigned l = 1; l <= exact_ell(n); ++l) {
                ells.push_back(l);
            }
        } else {
            ells.push_back(ell);
        }
        Rng rng(common.seed);
        double tv = 0, post = 1;
        json per_ell = json::array();
        for (unsigned l : ells) {
            const auto v = verify_excitation_measurement(n, l, trials, rng);
            tv = std::max(tv, v.max_tv_distance);
            post = std::min(post, v.min_post_fidelity);
            per_ell.push_back(json{{"ell", l},
                                   {"max_tv_distance", number(v.max_tv_distance)},
                                   {"min_post_fidelity", number(v.min_post_fidelity)},
                                   {"ledger", ledger_json(excitation_measurement_ledger(n, l))}});
        }
        rep.checks = {BoundCheck::at_most("total variation distance <= 1e-10", tv, 1e-10),
                      BoundCheck::at_least("post-state fidelity >= 1 - 1e-10", post, 1 - 1e-10)};
        rep.infidelity = 1 - post;
        rep.ledger = excitation_measurement_ledger(n, ells.back());
        rep.result = json{{"max_tv_distance", number(tv)}, {"min_post_fidelity", number(post)},
                          {"per_ell", per_ell}};
        return rep;
    }
};

struct SectorBounds : Command {
    unsigned n = 0, m = 0;

    explicit SectorBounds(CLI::App &root) {
        app = root.add_subcommand("sector-bounds", "Excitation-sector decomposition of the rotated Dicke state");
        app->add_option("--n", n, "Sites (default 4M)");
        app->add_option("--m", m, "Excitations")->required()->check(CLI::Range(1u, 100000u));
        common.add_to(*app);
    }

    Report run() override {
        if (n == 0) {
            n = 4 * m;
        }
        Report rep;
        rep.subcommand = "sector-bounds";
        rep.config = json{{"n", n}, {"m", m}};
        common.fill(rep.config);
        if (n < m) {
            throw std::invalid_argument("sector-bounds needs N >= M");
        }
        const double p = double(m) / n;
        const double theta = std::asin(std::sqrt(p));
        const auto c = sector_coefficients(n, m, theta);
        const double total = sector_tail(c, 0);
        rep.checks.push_back(BoundCheck::at_most("|sum |c_s|^2 - 1| <= 1e-10", std::abs(total - 1), 1e-10));

        json tails = json::array();
        if (n >= 4 * m) {
            for (unsigned s = 3 * m; s <= n; ++s) {
                const double tail = sector_tail(c, s), bound = sector_tail_bound(m, s);
                tails.push_back(json{{"s", s}, {"tail", number(tail)}, {"bound", number(bound)}});
                rep.checks.push_back(BoundCheck::at_most("tail from s = " + std::to_string(s), tail, bound));
            }
        }
        json dense = nullptr;
        if (n <= 12) {
            auto x = make_dicke_state(n, m);
            const Matrix v_dag = product_rotation(p).adjoint();
            for (Qubit q = 0; q < n; ++q) {
                x.apply_single(q, v_dag);
            }
            double worst = 0;
            for (unsigned s = 0; s <= n; ++s) {
                worst = std::max(worst, std::abs(inner_product(make_dicke_state(n, s), x) - c[s]));
            }
            dense = number(worst);
            rep.checks.push_back(BoundCheck::at_most("max |c_s - overlap_s| <= 1e-10", worst, 1e-10));
        }
        json coeffs = json::array();
        for (auto z : c) {
            coeffs.push_back(complex_json(z));
        }
        rep.result = json{{"theta", number(theta)},
                          {"norm_sum", number(total)},
                          {"coefficients", coeffs},
                          {"tails", tails},
                          {"max_dense_deviation", dense}};
        return rep;
    }
};

struct Table1 : Command {
    std::string row;
    unsigned m = 1, n = 0;
    double eps = 1e-2;
    std::size_t trials = 10;

    explicit Table1(CLI::App &root) {
        app = root.add_subcommand("table1", "Measured resources for one row of the resource table");
        app->add_option("--row", row, "Row identifier")
            ->required()
            ->check(CLI::IsMember({"w-result3", "w-result3-parallel", "w-result4", "dicke-result3",
                                   "dicke-result3-parallel", "dicke-result5"}));
        app->add_option("--m", m, "Excitations (Dicke rows)")->capture_default_str();
        app->add_option("--eps", eps, "Target infidelity")->capture_default_str();
        app->add_option("--n", n, "Sites (default 16, or 4M for dicke-result5)");
        app->add_option("--trials", trials, "Independent runs for the repetition count")->capture_default_str()
            ->check(CLI::PositiveNumber);
        common.add_to(*app);
    }

    // Mean attempts over independent repeat-until-success runs.
    template <class Attempt>
    json measure_repetitions(Attempt &&attempt, double &mean_infidelity) {
        double reps = 0, infid = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            Rng rng(common.seed, t);
            const PreparationReport r = attempt(rng);
            if (!r.success) {
                throw std::runtime_error("a repeat-until-success run exhausted its repetitions");
            }
            reps += double(r.repetitions_used);
            infid = std::max(infid, r.infidelity);
        }
        mean_infidelity = infid;
        return number(reps / trials);
    }

    Report run() override {
        const bool w_row = row.rfind("w-", 0) == 0;
        if (w_row) {
            m = 1;
        }
        if (n == 0) {
            n = row == "dicke-result5" ? std::max(4u, 4 * m) : 16;
        }
        Report rep;
        rep.subcommand = "table1";
        rep.config = json{{"row", row}, {"m", m}, {"eps", eps}, {"n", n}, {"trials", trials}};
        common.fill(rep.config);
        if (!(eps > 0 && eps < 1)) {
            throw std::invalid_argument("eps must lie in (0, 1)");
        }
        json claimed, measured;
        double worst_infidelity = 0;

        if (row == "w-result3" || row == "dicke-result3" || row == "w-result3-parallel" ||
            row == "dicke-result3-parallel") {
            const bool parallel = row.find("parallel") != std::string::npos;
            const DickeParams params{n, m, eps, std::nullopt};
            auto r = dicke_ledger_report(params, parallel);
            const bool simulate = !parallel || parallel_register_size(n, r.ell) <= StateVector::kMaxQubits;
            json nr = nullptr;
            if (simulate) {
                nr = measure_repetitions(
                    [&](Rng &rng) {
                        return parallel ? prepare_dicke_parallel(params, 100000, rng)
                                        : prepare_dicke(params, 100000, rng);
                    },
                    worst_infidelity);
                rep.infidelity = worst_infidelity;
                rep.checks.push_back(BoundCheck::at_most("worst infidelity <= eps", worst_infidelity, eps));
            }
            rep.ledger = r.ledger;
            rep.success_probability = r.success_probability;
            rep.checks.push_back(BoundCheck::at_least("success probability >= 1/sqrt(8 pi M)", r.success_probability,
                                                      1 / (kSqrt8Pi * std::sqrt(double(m)))));
            const double d = double(r.ledger.depth());
            if (parallel) {
                claimed = json{{"D", "O(1)"}, {"N_a", m == 1 ? "O(ln ln 1/eps)" : "O(l_{M,eps})"},
                               {"N_r", m == 1 ? "O(1)" : "O(sqrt(M))"}};
                rep.checks.push_back(BoundCheck::at_most("depth <= 16", d, 16));
                rep.checks.push_back(BoundCheck::at_least("depth >= 16", d, 16));
                rep.checks.push_back(BoundCheck::at_most("ancillas per site <= 2 ell - 1",
                                                         double(r.ledger.ancillas_per_site), 2.0 * r.ell - 1));
            } else {
                claimed = json{{"D", m == 1 ? "O(ln ln 1/eps)" : "O(l_{M,eps})"}, {"N_a", "1"},
                               {"N_r", m == 1 ? "O(1)" : "O(sqrt(M))"}};
                rep.checks.push_back(BoundCheck::at_most("depth <= 7 ell + 3", d, 7.0 * r.ell + 3));
                rep.checks.push_back(BoundCheck::at_least("depth >= 7 ell + 3", d, 7.0 * r.ell + 3));
                rep.checks.push_back(
                    BoundCheck::at_most("ancillas per site <= 1", double(r.ledger.ancillas_per_site), 1));
            }
            measured = json{{"D", r.ledger.depth()},
                            {"N_a", r.ledger.ancillas_per_site},
                            {"extra_ancillas", r.ledger.extra_ancillas},
                            {"N_r", nr},
                            {"N_r_expected", number(1 / r.success_probability)},
                            {"ell", r.ell},
                            {"exact_regime", r.exact_regime},
                            {"simulated", simulate}};
        } else if (row == "w-result4") {
            const double delta = 2 * std::sqrt(eps);
            if (delta > 1) {
                throw std::invalid_argument("w-result4 needs eps <= 1/4");
            }
            const PreparationReport first = [&] {
                Rng rng(common.seed, 0);
                return prepare_w_parity(n, delta, 100000, rng);
            }();
            const json nr = measure_repetitions([&](Rng &rng) { return prepare_w_parity(n, delta, 100000, rng); },
                                                worst_infidelity);
            rep.infidelity = worst_infidelity;
            rep.ledger = first.ledger;
            rep.success_probability = first.success_probability;
            claimed = json{{"D", "O(1)"}, {"N_a", "1"}, {"N_r", "O(1/sqrt(eps))"}};
            const double d = double(first.ledger.depth());
            rep.checks.push_back(BoundCheck::at_most("worst infidelity <= eps", worst_infidelity, eps));
            rep.checks.push_back(
                BoundCheck::at_least("success probability >= delta/2", first.success_probability, delta / 2));
            rep.checks.push_back(BoundCheck::at_most("depth <= 10", d, 10));
            rep.checks.push_back(BoundCheck::at_least("depth >= 10", d, 10));
            rep.checks.push_back(
                BoundCheck::at_most("ancillas per site <= 1", double(first.ledger.ancillas_per_site), 1));
            measured = json{{"D", first.ledger.depth()},
                            {"N_a", first.ledger.ancillas_per_site},
                            {"extra_ancillas", first.ledger.extra_ancillas},
                            {"N_r", nr},
                            {"N_r_expected", number(1 / first.success_probability)},
                            {"delta", number(delta)},
                            {"simulated", true}};
        } else {
            const double delta = eps / 4;
            const auto r = improved_dicke(ImprovedDickeParams{n, m, delta, std::nullopt});
            rep.infidelity = r.infidelity;
            rep.success_probability = 1.0;
            rep.ledger = r.ledger;
            claimed = json{{"D", "O(M^(1/4) l_{M,eps}^2)"}, {"N_a", "1 + l_{M,eps}/N"}, {"N_r", "1"}};
            rep.checks.push_back(BoundCheck::at_most("infidelity <= eps", r.infidelity, eps));
            rep.checks.push_back(BoundCheck::at_most("repetitions <= 1", double(r.ledger.repetitions), 1));
            rep.checks.push_back(BoundCheck::at_most("iterations <= pi (8 pi M)^(1/4) / 2", r.iterations,
                                                     r.iteration_bound));
            measured = json{{"D", r.ledger.depth()},
                            {"N_a", number(r.ledger.ancillas_per_site + double(r.ledger.extra_ancillas) / n)},
                            {"extra_ancillas", r.ledger.extra_ancillas},
                            {"N_r", 1},
                            {"iterations", r.iterations},
                            {"ell", r.ell},
                            {"exact_regime", r.exact_regime},
                            {"delta", number(delta)},
                            {"simulated", true}};
        }
        rep.result = json{{"row", row}, {"claimed", claimed}, {"measured", measured}};
        return rep;
    }
};

// ---------------------------------------------------------------------------------------------
// Sweeps.

const std::vector<std::string> kSweepColumns = {
    "kind", "n", "m", "eps", "ell_requested", "ell_used", "exact_regime", "infidelity", "infidelity_analytic",
    "success_probability", "bound", "ratio", "status", "error"};

struct SweepCell {
    unsigned n, m;
    std::optional<unsigned> ell;
};

json sweep_row(const std::string &kind, const SweepCell &cell, double eps) {
    json row;
    for (const auto &c : kSweepColumns) {
        row[c] = nullptr;
    }
    row["kind"] = kind;
    row["n"] = cell.n;
    row["m"] = cell.m;
    try {
        DickeParams params{cell.n, cell.m, eps, cell.ell};
        if (kind == "dicke-ell") {
            params.eps = 0.5;
            row["ell_requested"] = *cell.ell;
            params.validate();
            const auto led = dicke_ledger_report(params, false);
            row["ell_used"] = led.ell;
            row["exact_regime"] = led.exact_regime;
            const double p_class = led.success_probability;
            const double analytic = 1 - binomial_pmf(cell.n, cell.m, params.p()) / p_class;
            row["infidelity_analytic"] = number(std::max(0.0, analytic));
            row["success_probability"] = number(p_class);
            double infid = std::max(0.0, analytic);
            if (cell.n + led.ell <= StateVector::kMaxQubits) {
                infid = prepare_dicke_postselected(params).infidelity;
                row["infidelity"] = number(infid);
            }
            bool ok = true;
            if ((std::uint64_t{1} << led.ell) >= 4ull * cell.m) {
                const double bound = dicke_infidelity_bound(cell.m, led.ell);
                row["bound"] = number(bound);
                row["ratio"] = number(infid / bound);
                ok = infid <= bound;
            }
            row["status"] = ok ? "ok" : "bound_violated";
        } else {
            row["eps"] = eps;
            params.validate();
            const auto led = dicke_ledger_report(params, false);
            row["ell_used"] = led.ell;
            row["exact_regime"] = led.exact_regime;
            const double bound = 1 / (kSqrt8Pi * std::sqrt(double(cell.m)));
            row["success_probability"] = number(led.success_probability);
            row["bound"] = number(bound);
            row["ratio"] = number(led.success_probability / bound);
            row["status"] = led.success_probability >= bound ? "ok" : "bound_violated";
        }
    } catch (const std::exception &e) {
        row["status"] = "error";
        row["error"] = e.what();
    }
    return row;
}

struct Sweep : Command {
    std::string kind = "dicke-ell";
    unsigned n = 0;
    std::string ms = "1,2";
    std::string ells = "2..6";
    double eps = 1e-3;
    unsigned threads = default_threads();

    explicit Sweep(CLI::App &root) {
        app = root.add_subcommand("sweep", "Parameter grid written as one CSV row per cell");
        app->add_option("--kind", kind, "dicke-ell: infidelity vs ell; psucc: success probability vs M")
            ->check(CLI::IsMember({"dicke-ell", "psucc"}))
            ->capture_default_str();
        app->add_option("--n", n, "Sites (default 16 for dicke-ell, 4M for psucc)");
        app->add_option("--ms", ms, "Excitation numbers, comma list or a..b")->capture_default_str();
        app->add_option("--ells", ells, "ell values for dicke-ell")->capture_default_str();
        app->add_option("--eps", eps, "Target infidelity for psucc")->capture_default_str();
        app->add_option("--threads", threads, "Worker threads (default from LPREP_THREADS)")
            ->check(CLI::Range(1u, 256u));
        common.add_to(*app, "csv");
    }

    Report run() override {
        Report rep;
        rep.subcommand = "sweep";
        const auto m_list = parse_index_list(ms);
        const auto ell_list = parse_index_list(ells);
        rep.config = json{{"kind", kind}, {"n", n == 0 ? json() : json(n)}, {"ms", m_list}, {"ells", ell_list},
                          {"eps", eps}, {"threads", threads}};
        common.fill(rep.config);

        std::vector<SweepCell> cells;
        for (auto m : m_list) {
            const unsigned nn = n != 0 ? n : (kind == "dicke-ell" ? 16u : std::max(1u, 4 * unsigned(m)));
            if (kind == "dicke-ell") {
                for (auto l : ell_list) {
                    cells.push_back({nn, unsigned(m), unsigned(l)});
                }
            } else {
                cells.push_back({nn, unsigned(m), std::nullopt});
            }
        }
        if (cells.size() > 10000) {
            throw std::invalid_argument("sweep grids are limited to 10^4 cells");
        }
        std::vector<json> rows(cells.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < cells.size(); i = next++) {
                rows[i] = sweep_row(kind, cells[i], eps);
            }
        };
        std::vector<std::thread> pool;
        const unsigned count = std::min<std::size_t>(threads, std::max<std::size_t>(cells.size(), 1));
        for (unsigned t = 1; t < count; ++t) {
            pool.emplace_back(worker);
        }
        worker();
        for (auto &t : pool) {
            t.join();
        }

        json table = json::array();
        std::size_t errors = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto &r = rows[i];
            if (r["status"] == "error") {
                ++errors;
            } else if (!r["bound"].is_null()) {
                const bool at_least = kind == "psucc";
                const double lhs = at_least ? r["success_probability"].get<double>()
                                            : (r["infidelity"].is_null() ? r["infidelity_analytic"] : r["infidelity"])
                                                  .get<double>();
                const std::string name = fmt_row_name(i);
                rep.checks.push_back(at_least ? BoundCheck::at_least(name, lhs, r["bound"].get<double>())
                                              : BoundCheck::at_most(name, lhs, r["bound"].get<double>()));
            }
            table.push_back(r);
        }
        rep.result = json{{"columns", kSweepColumns}, {"rows", table}, {"errors", errors}};
        return rep;
    }

    std::string fmt_row_name(std::size_t i) const {
        return "row " + std::to_string(i) + (kind == "psucc" ? ": P >= 1/sqrt(8 pi M)"
                                                              : ": infidelity <= sqrt(8 pi M) exp(-2^(ell-1))");
    }
};

void write_sweep_csv(const json &report, std::ostream &out) {
    for (std::size_t i = 0; i < kSweepColumns.size(); ++i) {
        out << (i ? "," : "") << kSweepColumns[i];
    }
    out << "\n";
    for (const auto &row : report["result"]["rows"]) {
        for (std::size_t i = 0; i < kSweepColumns.size(); ++i) {
            out << (i ? "," : "") << csv_cell(row[kSweepColumns[i]]);
        }
        out << "\n";
    }
}

}  // namespace

unsigned default_threads() {
    if (const char *env = std::getenv("LPREP_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 256) {
            return static_cast<unsigned>(v);
        }
    }
    return 1;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Measurement-assisted preparation of Dicke, W and free-fermion states", "lprep"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Command>> commands;
    commands.push_back(std::make_unique<PrepareDicke>(app));
    commands.push_back(std::make_unique<PrepareW>(app));
    commands.push_back(std::make_unique<ImprovedDicke>(app));
    commands.push_back(std::make_unique<PrepareXX>(app));
    commands.push_back(std::make_unique<RunLadder>(app));
    commands.push_back(std::make_unique<VerifyV>(app));
    commands.push_back(std::make_unique<VerifyMeasure>(app));
    commands.push_back(std::make_unique<SectorBounds>(app));
    commands.push_back(std::make_unique<Table1>(app));
    commands.push_back(std::make_unique<Sweep>(app));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        CLI::App *target = &app;
        for (auto *sub : app.get_subcommands()) {
            target = sub;
        }
        out << target->help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        CLI::App *target = &app;
        for (auto *sub : app.get_subcommands()) {
            target = sub;
        }
        err << "error: " << e.what() << "\n\n" << target->help();
        return kExitUsage;
    }

    Command *command = nullptr;
    for (auto &c : commands) {
        if (c->app->parsed()) {
            command = c.get();
        }
    }
    json report;
    bool violated = false;
    try {
        const Report rep = command->run();
        violated = rep.violated();
        report = rep.to_json(timestamp_now());
    } catch (const std::exception &e) {
        // Invalid parameters surface here as std::invalid_argument from validation.
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    std::ofstream file;
    std::ostream *sink = &out;
    if (!command->common.output.empty()) {
        file.open(command->common.output);
        if (!file) {
            err << "error: cannot open " << command->common.output << " for writing\n";
            return kExitUsage;
        }
        sink = &file;
    }
    if (command->common.format == "csv") {
        if (report["subcommand"] == "sweep") {
            write_sweep_csv(report, *sink);
        } else {
            write_flat_csv(report, *sink);
        }
    } else {
        *sink << report.dump(2) << "\n";
    }
    return violated ? kExitBoundViolated : kExitOk;
}

}  // namespace lprep::cli
