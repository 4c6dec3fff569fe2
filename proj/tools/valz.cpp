// valz — decision procedure for (Z, +, 0, 1, v) with a valuation given by a
// descending chain of subgroups. Batch solver: one command per process.

#include <chrono>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "valz/chain_spec.hpp"
#include "valz/congruence.hpp"
#include "valz/formula.hpp"
#include "valz/formula_parse.hpp"
#include "valz/oracle.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 ok, 2 parse/domain error, 3 unsupported fragment,
// 4 resource cap, 5 oracle mismatch.
constexpr int kExitParse = 2;
constexpr int kExitUnsupported = 3;
constexpr int kExitResource = 4;
constexpr int kExitMismatch = 5;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::string verdict_str(valz::DistalityVerdict v) {
    switch (v) {
        case valz::DistalityVerdict::Distal: return "distal";
        case valz::DistalityVerdict::NotDistal: return "not distal";
        default: return "undetermined beyond prefix";
    }
}

int run_decide(const std::string& chain_file, const std::string& formula_text, bool want_witness,
               bool use_oracle, bool as_json, std::optional<uint32_t> value_bound,
               std::optional<size_t> max_dnf) {
    Timer timer;
    valz::ChainSpec spec = valz::load_chain_spec(chain_file);
    valz::FormulaPtr sentence = valz::parse_formula(formula_text);
    valz::DecideOptions opts;
    opts.value_bound = value_bound;
    if (max_dnf) opts.max_dnf_clauses = *max_dnf;

    bool result = valz::decide(sentence, spec.chain, opts);
    std::optional<int64_t> witness;
    if (want_witness && result) witness = valz::decide_witness(sentence, spec.chain, opts);

    if (use_oracle) {
        uint32_t vb = value_bound ? *value_bound : valz::default_value_bound(sentence, spec.chain);
        bool check = valz::brute_decide(sentence, spec.chain, 64, vb);
        if (check != result) {
            std::cerr << "oracle mismatch: engine=" << (result ? "true" : "false")
                      << " oracle=" << (check ? "true" : "false") << "\n";
            return kExitMismatch;
        }
    }

    if (as_json) {
        json out{{"command", "decide"}, {"result", result}, {"time_ms", timer.ms()}};
        if (witness) out["witness"] = *witness;
        std::cout << out.dump() << "\n";
    } else {
        std::cout << (result ? "true" : "false");
        if (witness) std::cout << " (witness x = " << *witness << ")";
        std::cout << "  [" << timer.ms() << " ms]\n";
    }
    return 0;
}

int run_count(const std::string& chain_file, const std::string& system_text, bool use_oracle,
              bool as_json) {
    Timer timer;
    valz::ChainSpec spec = valz::load_chain_spec(chain_file);
    valz::CongruenceSystem system = valz::parse_system_text(system_text);

    valz::CongruenceSystem counted = system;
    bool has_positive = false;
    for (const auto& c : counted.members)
        if (!c.negated) has_positive = true;
    if (!has_positive)
        counted.members.push_back({1, 0, 1, valz::ValueElement::fin(0), false});

    valz::SolutionCount count = valz::count_system(counted, spec.chain);
    if (use_oracle) {
        uint64_t check = valz::brute_count(counted, spec.chain);
        if (check != count.count) {
            std::cerr << "oracle mismatch: engine=" << count.count << " oracle=" << check << "\n";
            return kExitMismatch;
        }
    }

    if (as_json) {
        json out{{"command", "count"},
                 {"count", count.count},
                 {"modulus", count.boundary_modulus.value},
                 {"solvable", count.solvable},
                 {"time_ms", timer.ms()}};
        if (count.witness) out["witness"] = *count.witness;
        std::cout << out.dump() << "\n";
    } else {
        std::cout << count.count << " (mod " << count.boundary_modulus.value << ")"
                  << "  [" << timer.ms() << " ms]\n";
    }
    return 0;
}

int run_qe(const std::string& chain_file, const std::string& formula_text, bool as_json,
           std::optional<uint32_t> value_bound) {
    Timer timer;
    valz::ChainSpec spec = valz::load_chain_spec(chain_file);
    valz::FormulaPtr formula = valz::parse_formula(formula_text);
    valz::DecideOptions opts;
    opts.value_bound = value_bound;
    valz::FormulaPtr out = valz::eliminate_group_quantifier(formula, spec.chain, opts);
    if (as_json) {
        json j{{"command", "qe"}, {"formula", valz::print_formula(out)}, {"time_ms", timer.ms()}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << valz::print_formula(out) << "\n";
    }
    return 0;
}

int run_distal(const std::string& chain_file, bool as_json) {
    valz::ChainSpec spec = valz::load_chain_spec(chain_file);
    valz::DistalityReport report = valz::distality_report(spec.chain);
    if (as_json) {
        json out{{"command", "distal"}, {"verdict", verdict_str(report.verdict)}};
        if (report.bound) out["bound"] = *report.bound;
        std::cout << out.dump() << "\n";
        return 0;
    }
    if (report.verdict == valz::DistalityVerdict::Distal) {
        std::cout << "distal, bound " << *report.bound << "\n";
    } else if (report.bound) {
        std::cout << verdict_str(report.verdict) << " (max " << *report.bound << ")\n";
    } else {
        std::cout << verdict_str(report.verdict) << "\n";
    }
    return 0;
}

int run_chain_info(const std::string& chain_file, bool as_json) {
    valz::ChainSpec spec = valz::load_chain_spec(chain_file);
    const auto& chain = spec.chain;
    uint32_t shown = chain.cycle() ? static_cast<uint32_t>(chain.prefix().size() +
                                                           2 * chain.cycle()->size())
                                   : static_cast<uint32_t>(chain.prefix().size());
    shown = std::min(shown, 16u);
    valz::DistalityReport report = valz::distality_report(chain);
    if (as_json) {
        json moduli = json::array();
        for (uint32_t i = 0; i <= shown; ++i) moduli.push_back(chain.modulus_value_at(i));
        json out{{"command", "chain-info"},
                 {"name", spec.name},
                 {"ambient", chain.ambient().is_integers ? "Z" : "general"},
                 {"prefix", chain.prefix()},
                 {"eventually_periodic", chain.eventually_periodic()},
                 {"moduli", moduli},
                 {"distality", verdict_str(report.verdict)}};
        if (chain.cycle()) out["cycle"] = *chain.cycle();
        std::cout << out.dump() << "\n";
        return 0;
    }
    if (!spec.name.empty()) std::cout << "name: " << spec.name << "\n";
    std::cout << "ambient: " << (chain.ambient().is_integers ? "Z" : "general") << "\n";
    std::cout << "moduli n_0..n_" << shown << ":";
    for (uint32_t i = 0; i <= shown; ++i) std::cout << " " << chain.modulus_value_at(i);
    std::cout << (chain.eventually_periodic() ? " ..." : " (end of prefix)") << "\n";
    std::cout << "distality: " << verdict_str(report.verdict);
    if (report.bound) std::cout << " (bound " << *report.bound << ")";
    std::cout << "\n";
    return 0;
}

std::vector<bool> parse_sigma_pattern(const std::string& pattern) {
    if (pattern == "id") return {false};
    if (pattern == "swap") return {true};
    std::vector<bool> sigma;
    for (char c : pattern) {
        if (c == 'i')
            sigma.push_back(false);
        else if (c == 's')
            sigma.push_back(true);
        else
            throw valz::ParseError("sigma pattern uses 'i' (identity) and 's' (swap)", 0);
    }
    if (sigma.empty()) throw valz::ParseError("sigma pattern must be nonempty", 0);
    return sigma;
}

int run_retract_check(int64_t p0, int64_t p1, int64_t q, const std::string& sigma_pattern,
                      int64_t range, bool as_json) {
    Timer timer;
    std::vector<bool> sigma = parse_sigma_pattern(sigma_pattern);
    valz::SigmaChain sc =
        valz::build_sigma_chain(p0, p1, q, sigma, static_cast<uint32_t>(3 * sigma.size()));
    valz::RetractCheckResult res = valz::retract_check(sc, range);
    if (as_json) {
        json out{{"command", "retract-check"},
                 {"agreements", res.agreements},
                 {"total", res.total},
                 {"pass", res.pass()},
                 {"time_ms", timer.ms()}};
        std::cout << out.dump() << "\n";
    } else {
        std::cout << (res.pass() ? "pass" : "FAIL") << ": " << res.agreements << "/" << res.total
                  << " agreements  [" << timer.ms() << " ms]\n";
    }
    return res.pass() ? 0 : kExitMismatch;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"valz — decision procedure for valued (Z, +)"};
    app.require_subcommand(1);

    std::string chain_file, formula_text, system_text, sigma_pattern = "id";
    bool want_witness = false, use_oracle = false, as_json = false;
    std::optional<uint32_t> value_bound;
    std::optional<size_t> max_dnf;
    int64_t p0 = 2, p1 = 3, q = 5, range = 1000;

    auto add_common = [&](CLI::App* cmd, bool with_formula) {
        cmd->add_option("--chain", chain_file, "chain spec file")->required();
        if (with_formula) cmd->add_option("formula", formula_text, "formula text")->required();
        cmd->add_flag("--json", as_json, "machine-readable output");
    };

    CLI::App* decide = app.add_subcommand("decide", "decide a sentence");
    add_common(decide, true);
    decide->add_flag("--witness", want_witness, "print a witness for a true existential");
    decide->add_flag("--oracle", use_oracle, "cross-check against the brute-force oracle");
    decide->add_option("--value-bound", value_bound, "override the value-sort search bound");
    decide->add_option("--max-dnf", max_dnf, "cap on DNF clauses");

    CLI::App* count = app.add_subcommand("count", "count solutions of a congruence system");
    count->add_option("--chain", chain_file, "chain spec file")->required();
    count->add_option("system", system_text, "system text, e.g. \"x = 1 mod B[1]; x != 3 mod B[3]\"")
        ->required();
    count->add_flag("--json", as_json, "machine-readable output");
    count->add_flag("--oracle", use_oracle, "cross-check against the brute-force oracle");

    CLI::App* qe = app.add_subcommand("qe", "eliminate a group quantifier");
    add_common(qe, true);
    qe->add_option("--value-bound", value_bound, "override the value-sort search bound");

    CLI::App* distal = app.add_subcommand("distal", "distality report for a chain");
    distal->add_option("--chain", chain_file, "chain spec file")->required();
    distal->add_flag("--json", as_json, "machine-readable output");

    CLI::App* info = app.add_subcommand("chain-info", "describe a chain");
    info->add_option("--chain", chain_file, "chain spec file")->required();
    info->add_flag("--json", as_json, "machine-readable output");

    CLI::App* retract = app.add_subcommand("retract-check",
                                           "verify the w-comparison gadget against direct w");
    retract->add_option("p0", p0, "first prime")->required();
    retract->add_option("p1", p1, "second prime")->required();
    retract->add_option("q", q, "third prime")->required();
    retract->add_option("--sigma", sigma_pattern, "id, swap, or a pattern like 'isis'");
    retract->add_option("--range", range, "check all 0 < |a|,|b| <= range");
    retract->add_flag("--json", as_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (decide->parsed())
            return run_decide(chain_file, formula_text, want_witness, use_oracle, as_json,
                              value_bound, max_dnf);
        if (count->parsed()) return run_count(chain_file, system_text, use_oracle, as_json);
        if (qe->parsed()) return run_qe(chain_file, formula_text, as_json, value_bound);
        if (distal->parsed()) return run_distal(chain_file, as_json);
        if (info->parsed()) return run_chain_info(chain_file, as_json);
        if (retract->parsed())
            return run_retract_check(p0, p1, q, sigma_pattern, range, as_json);
    } catch (const valz::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const valz::SortError& e) {
        std::cerr << "sort error: " << e.what() << "\n";
        return kExitParse;
    } catch (const valz::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitParse;
    } catch (const valz::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitParse;
    } catch (const valz::DepthExceeded& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kExitUnsupported;
    } catch (const valz::Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kExitUnsupported;
    } catch (const valz::ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const valz::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
