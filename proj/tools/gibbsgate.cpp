#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "gibbsgate/chain.hpp"
#include "gibbsgate/ergodic.hpp"
#include "gibbsgate/io.hpp"
#include "gibbsgate/kernel.hpp"
#include "gibbsgate/kgibbs.hpp"
#include "gibbsgate/sigma.hpp"
#include "gibbsgate/space.hpp"
#include "gibbsgate/tip.hpp"

namespace {

using namespace gibbsgate;

const char* yn(bool b) { return b ? "true" : "false"; }

std::string label_mask(const std::vector<std::string>& labels,
                       const std::vector<std::uint8_t>& mask) {
    std::string out = "[";
    bool first = true;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        if (!first) out += ", ";
        out += labels[i];
        first = false;
    }
    return out + "]";
}

ordered_json label_mask_json(const std::vector<std::string>& labels,
                             const std::vector<std::uint8_t>& mask) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) arr.push_back(labels[i]);
    return arr;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open file: " + path);
    return out;
}

int cmd_check(const std::string& path, bool witness, bool atoms, bool oracle, bool strict,
              const std::string& format) {
    const FiniteJoint j = load_joint(path);
    const AdmissibilityReport rep = check_gibbs_admissible(j);
    if (oracle && oracle_condition_6(j) != rep.admissible)
        throw invariant_violation("connectivity verdict disagrees with the exhaustive rectangle scan");
    const std::vector<Cell> cells = support_cells(j);

    if (format == "json") {
        ordered_json doc;
        doc["admissible"] = rep.admissible;
        doc["atoms"] = rep.atom_count;
        if (witness && rep.has_witness) {
            ordered_json w;
            w["u"] = label_mask_json(j.x_labels, rep.witness.u);
            w["v"] = label_mask_json(j.y_labels, rep.witness.v);
            doc["witness"] = std::move(w);
        }
        if (atoms) {
            ordered_json blocks = ordered_json::array();
            for (int b = 0; b < rep.atom_count; ++b) {
                ordered_json block = ordered_json::array();
                for (std::size_t c = 0; c < cells.size(); ++c)
                    if (rep.atoms.block_id[c] == b)
                        block.push_back({j.x_labels[cells[c].x], j.y_labels[cells[c].y]});
                blocks.push_back(std::move(block));
            }
            doc["atom_cells"] = std::move(blocks);
        }
        if (oracle) doc["oracle"] = "agree";
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "admissible: " << yn(rep.admissible) << ", atoms: " << rep.atom_count << "\n";
        if (witness && rep.has_witness)
            std::cout << "witness: U = " << label_mask(j.x_labels, rep.witness.u)
                      << ", V = " << label_mask(j.y_labels, rep.witness.v) << "\n";
        if (atoms)
            for (int b = 0; b < rep.atom_count; ++b) {
                std::cout << "atom " << b << ":";
                for (std::size_t c = 0; c < cells.size(); ++c)
                    if (rep.atoms.block_id[c] == b)
                        std::cout << " (" << j.x_labels[cells[c].x] << ", "
                                  << j.y_labels[cells[c].y] << ")";
                std::cout << "\n";
            }
        if (oracle) std::cout << "oracle: agree\n";
    }
    return strict && !rep.admissible ? 2 : 0;
}

int cmd_iterate(const std::string& path, const std::string& phi_path, std::size_t steps,
                const std::string& csv) {
    const FiniteJoint j = load_joint(path);
    const RealGrid phi = load_observable(phi_path);
    const IterateTrace tr = bc_iterates(j, phi, steps);
    // Even iterates condition on X, so each is one value per row.
    for (std::size_t n = 2; n <= steps; n += 2) {
        std::cout << "phi_" << n << ":";
        for (std::size_t i = 0; i < j.x_size; ++i)
            std::cout << " " << format_double(tr.steps[n](i, 0));
        std::cout << "\n";
    }
    const GibbsKernel k = build_kernel(j);
    const double d = verify_theorem_41(j, k, phi, steps / 2);
    std::cout << "max_discrepancy: " << format_double(d) << "\n";
    if (!csv.empty()) {
        std::ofstream out = open_csv(csv);
        out << "n,x,y,value\n";
        for (std::size_t n = 0; n < tr.steps.size(); ++n)
            for (std::size_t i = 0; i < j.x_size; ++i)
                for (std::size_t c = 0; c < j.y_size; ++c)
                    out << n << "," << i << "," << c << ","
                        << format_double(tr.steps[n](i, c)) << "\n";
    }
    if (d > 1e-10) {
        std::cerr << "error: kernel power and iterate disagree beyond 1e-10\n";
        return 3;
    }
    return 0;
}

int cmd_ergodic(const std::string& path, std::size_t max_steps, bool doeblin, bool spectral,
                const std::string& csv) {
    const FiniteJoint j = load_joint(path);
    const GibbsKernel k = build_kernel(j);
    const ErgodicityReport rep = ergodic_report(j, k, max_steps, 1e-12);
    std::cout << "s0_full: " << yn(rep.s0_full) << "\n";
    std::cout << "aperiodic: " << yn(rep.aperiodic) << "\n";
    std::cout << "fitted_rate: " << format_double(rep.fitted_rate) << "\n";
    if (rep.ergodic)
        std::cout << "verdict: ergodic\n";
    else
        std::cout << "verdict: not ergodic: " << rep.atom_count
                  << (rep.atom_count == 1 ? " atom" : " atoms") << "\n";
    if (doeblin) {
        const auto cert = doeblin_certificate(j);
        if (cert)
            std::cout << "doeblin: epsilon = " << format_double(cert->epsilon)
                      << ", rate_bound = " << format_double(cert->rate_bound)
                      << ", U = " << label_mask(j.x_labels, cert->u)
                      << ", V = " << label_mask(j.y_labels, cert->v)
                      << ", s = " << format_double(cert->s)
                      << ", t = " << format_double(cert->t) << "\n";
        else
            std::cout << "doeblin: none\n";
    }
    if (spectral) std::cout << "spectral_rate: " << format_double(spectral_rate(k)) << "\n";
    if (!csv.empty()) {
        std::ofstream out = open_csv(csv);
        out << "n,sup_tv\n";
        for (std::size_t i = 0; i < rep.tv_curve.size(); ++i)
            out << (i + 1) << "," << format_double(rep.tv_curve[i]) << "\n";
    }
    return 0;
}

StartSpec parse_start(const std::string& text) {
    StartSpec s;
    if (text == "stationary") return s;
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("invalid start state");
    try {
        s.state.x = std::stoul(text.substr(0, comma));
        s.state.y = std::stoul(text.substr(comma + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid start state");
    }
    s.kind = StartSpec::Kind::State;
    return s;
}

int cmd_simulate(const std::string& path, const std::string& phi_path, std::size_t steps,
                 std::uint64_t seed, std::size_t chains, const std::string& start,
                 const std::string& csv) {
    const FiniteJoint j = load_joint(path);
    const RealGrid phi = load_observable(phi_path);
    ChainConfig cfg;
    cfg.seed = seed;
    cfg.steps = steps;
    cfg.chains = chains;
    cfg.start = parse_start(start);
    const std::size_t stride = std::max<std::size_t>(1, steps / 1000);
    const SllnReport rep = slln_estimate(j, phi, cfg, stride);
    constexpr double band = 0.01;

    std::cout << "rng: " << rng_name << ", seed: " << seed << "\n";
    std::cout << "target: " << format_double(rep.target) << "\n";
    bool pass = true;
    for (std::size_t r = 0; r < rep.finals.size(); ++r) {
        std::cout << "replicate " << r << ": final = " << format_double(rep.finals[r])
                  << ", abs_error = " << format_double(rep.final_abs_error[r]) << "\n";
        if (!(rep.final_abs_error[r] <= band)) pass = false;
    }
    std::cout << "band: " << format_double(band) << "\n";
    std::cout << "verdict: " << (pass ? "pass" : "fail") << "\n";
    if (!csv.empty()) {
        std::ofstream out = open_csv(csv);
        out << "replicate,n,mean\n";
        for (std::size_t r = 0; r < rep.running_means.size(); ++r)
            for (std::size_t i = 0; i < rep.record_ns.size(); ++i)
                out << r << "," << rep.record_ns[i] << ","
                    << format_double(rep.running_means[r][i]) << "\n";
    }
    return 0;
}

int cmd_kcheck(const std::string& path, bool oracle) {
    const KJoint kj = load_kjoint(path);
    const KAdmissibilityReport rep = check_k_admissible(kj);
    if (oracle && oracle_d_trivial(kj) != rep.admissible)
        throw invariant_violation("connectivity verdict disagrees with the exhaustive event scan");
    auto cell_text = [&](std::size_t flat) {
        std::string out = "(";
        for (std::size_t i = 0; i < kj.dims(); ++i) {
            if (i) out += ", ";
            out += std::to_string(kj.digit(flat, i));
        }
        return out + ")";
    };
    if (rep.admissible) {
        std::cout << "admissible: true, atoms: " << rep.atom_count << "\n";
    } else {
        std::cout << "admissible: false, atoms: " << rep.atom_count << "\n";
        if (rep.has_witness)
            std::cout << "witness: " << cell_text(rep.witness_a) << " / "
                      << cell_text(rep.witness_b) << " are in different atoms\n";
    }
    if (oracle) std::cout << "oracle: agree\n";
    return 0;
}

int cmd_tip(const std::string& path, const std::string& sets_path) {
    const FiniteJoint j = load_joint(path);
    const auto sets = load_events(sets_path);
    if (sets.empty()) throw std::invalid_argument("missing sets");
    for (const auto& [name, e] : sets) {
        const TipReport t = is_tip(j.mu, j.nu, e);
        std::cout << "set " << name << ": tip = " << yn(t.tip)
                  << ", components = " << t.components << "\n";
    }
    if (sets.size() < 2) return 0;
    for (std::size_t n = 0; n + 1 < sets.size(); ++n) {
        const CommunicationReport c = communicates(j.mu, j.nu, sets[n].second, sets[n + 1].second);
        std::cout << "communicates " << sets[n].first << " " << sets[n + 1].first << ": ";
        if (c.communicates)
            std::cout << "true via "
                      << (c.via_column ? "column " + j.y_labels[c.index]
                                       : "row " + j.x_labels[c.index])
                      << "\n";
        else
            std::cout << "false\n";
    }
    std::vector<Event> events;
    events.reserve(sets.size());
    for (const auto& [name, e] : sets) events.push_back(e);
    const ChainCertificate cert = tip_union_chain(j.mu, j.nu, events);
    if (cert.valid)
        std::cout << "chain valid, union TIP\n";
    else if (cert.fail_was_communication)
        std::cout << "no communication at step " << cert.fail_index << "\n";
    else
        std::cout << "set " << cert.fail_index << " not TIP\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact diagnostics for two-component Gibbs chains on finite joints"};
    app.require_subcommand(1);

    std::string check_path, check_format = "text";
    bool check_witness = false, check_atoms = false, check_oracle = false, check_strict = false;
    auto* check = app.add_subcommand("check", "Decide whether the joint admits the law of large numbers");
    check->add_option("input", check_path, "joint file")->required();
    check->add_flag("--witness", check_witness, "print a disconnecting rectangle when one exists");
    check->add_flag("--atoms", check_atoms, "list the connected components of the support");
    check->add_flag("--oracle", check_oracle, "cross-check against the exhaustive rectangle scan");
    check->add_flag("--strict", check_strict, "exit 2 when not admissible");
    check->add_option("--format", check_format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    std::string atoms_path, atoms_format = "text";
    auto* atoms = app.add_subcommand("atoms", "List support components (same as check --atoms)");
    atoms->add_option("input", atoms_path, "joint file")->required();
    atoms->add_option("--format", atoms_format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    std::string it_path, it_phi, it_csv;
    std::size_t it_steps = 4;
    auto* iterate = app.add_subcommand("iterate", "Alternating conditional expectations of an observable");
    iterate->add_option("input", it_path, "joint file")->required();
    iterate->add_option("--phi", it_phi, "observable file")->required();
    iterate->add_option("--steps", it_steps, "number of iterates")->check(CLI::PositiveNumber);
    iterate->add_option("--csv", it_csv, "write the full trace as CSV");

    std::string er_path, er_csv;
    std::size_t er_steps = 200;
    bool er_doeblin = false, er_spectral = false;
    auto* ergodic = app.add_subcommand("ergodic", "Convergence report for the transition kernel");
    ergodic->add_option("input", er_path, "joint file")->required();
    ergodic->add_option("--max-steps", er_steps, "kernel powers to examine")->check(CLI::PositiveNumber);
    ergodic->add_flag("--doeblin", er_doeblin, "search for a minorization certificate");
    ergodic->add_flag("--spectral", er_spectral, "report the second eigenvalue modulus");
    ergodic->add_option("--csv", er_csv, "write the total-variation curve as CSV");

    std::string si_path, si_phi, si_start = "stationary", si_csv;
    std::size_t si_steps = 10000, si_chains = 1;
    std::uint64_t si_seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Run the chain and track running means");
    simulate->add_option("input", si_path, "joint file")->required();
    simulate->add_option("--phi", si_phi, "observable file")->required();
    simulate->add_option("--steps", si_steps, "trajectory length")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", si_seed, "generator seed");
    simulate->add_option("--chains", si_chains, "independent replicates")->check(CLI::PositiveNumber);
    simulate->add_option("--start", si_start, "\"stationary\" or a fixed cell \"x,y\"");
    simulate->add_option("--csv", si_csv, "write running means as CSV");

    std::string kc_path;
    bool kc_oracle = false;
    auto* kcheck = app.add_subcommand("kcheck", "Admissibility of a k-coordinate joint");
    kcheck->add_option("input", kc_path, "k-joint file")->required();
    kcheck->add_flag("--oracle", kc_oracle, "cross-check against the exhaustive event scan");

    std::string tp_path, tp_sets;
    auto* tip = app.add_subcommand("tip", "Conditioned-support connectivity for a family of sets");
    tip->add_option("input", tp_path, "joint file supplying the base measures")->required();
    tip->add_option("--sets", tp_sets, "event family file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(check))
            return cmd_check(check_path, check_witness, check_atoms, check_oracle, check_strict,
                             check_format);
        if (app.got_subcommand(atoms))
            return cmd_check(atoms_path, false, true, false, false, atoms_format);
        if (app.got_subcommand(iterate)) return cmd_iterate(it_path, it_phi, it_steps, it_csv);
        if (app.got_subcommand(ergodic))
            return cmd_ergodic(er_path, er_steps, er_doeblin, er_spectral, er_csv);
        if (app.got_subcommand(simulate))
            return cmd_simulate(si_path, si_phi, si_steps, si_seed, si_chains, si_start, si_csv);
        if (app.got_subcommand(kcheck)) return cmd_kcheck(kc_path, kc_oracle);
        if (app.got_subcommand(tip)) return cmd_tip(tp_path, tp_sets);
    } catch (const gibbsgate::invariant_violation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
