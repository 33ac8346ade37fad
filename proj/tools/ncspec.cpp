// ncspec: K-theory, ideal lattices and Kochen-Specker checks for
// finite-dimensional C*-algebras.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncspec/foundations.hpp"
#include "ncspec/ideals.hpp"
#include "ncspec/io.hpp"
#include "ncspec/ktheory.hpp"
#include "ncspec/random.hpp"

using namespace ncspec;

namespace {

enum ExitCode {
    kOk = 0,
    kEmpty = 1,
    kMismatch = 2,
    kCapExceeded = 3,
    kUsage = 64,
    kBadData = 65,
};

struct RunConfig {
    double tolerance = kDefaultTolerance;
    std::uint64_t seed = 0;
    std::size_t max_saturation_rounds = 16;
    std::string output_format = "text";
};

std::string pattern_string(unsigned long mask, std::size_t k) {
    std::string s;
    for (std::size_t i = 0; i < k; ++i)
        s += ((mask >> i) & 1ul) ? '1' : '0';
    return s;
}

int cmd_k0(const std::string &spec, const RunConfig &cfg) {
    FdAlgebra a = FdAlgebra::parse(spec, cfg.tolerance);
    Rng rng(cfg.seed);
    std::vector<Projection> seeds;
    for (int i = 0; i < 2; ++i)
        seeds.push_back(rng.projection(a));
    SpatialDiagram d = build_core_diagram(a, seeds, {});
    if (cfg.output_format == "dot") {
        std::cout << to_dot(d);
        return kOk;
    }

    K0Standard k0(a);
    KTildeF kt(a, d);
    bool iso = false;
    std::string failure;
    try {
        eta_check(a, std::nullopt, d);
        iso = true;
    } catch (const IsoFailure &e) {
        failure = e.what();
    }

    json table = json::array();
    for (std::size_t i = 0; i < a.num_blocks(); ++i) {
        Projection e = Projection(matrix_unit(a, i, 0, 0));
        table.push_back(json{{"generator", "[e(" + std::to_string(i + 1) + ")_11]"},
                             {"k0", to_string(k0.class_of(e).coords)},
                             {"ktilde_f", to_string(kt.class_of_u(e).coords)}});
    }
    if (cfg.output_format == "json") {
        json out{{"algebra", a.spec()},
                 {"k0", group_summary(k0.group())},
                 {"ktilde_f", group_summary(kt.group())},
                 {"iso", iso},
                 {"generators", table},
                 {"seed", cfg.seed}};
        if (!iso)
            out["failure"] = failure;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "algebra: " << a.spec() << "\n"
                  << "K0 = " << k0.group().factors_string()
                  << ", Ktilde_f = " << kt.group().factors_string()
                  << ", iso = " << (iso ? "true" : "false") << "\n";
        for (const auto &row : table)
            std::cout << "  " << row["generator"].get<std::string>()
                      << "  K0 " << row["k0"].get<std::string>() << "  Ktilde_f "
                      << row["ktilde_f"].get<std::string>() << "\n";
        if (!iso)
            std::cerr << failure << "\n";
    }
    return iso ? kOk : kMismatch;
}

int cmd_ideals(const std::string &spec, const RunConfig &cfg) {
    FdAlgebra a = FdAlgebra::parse(spec, cfg.tolerance);
    SaturationResult res;
    try {
        res = saturate(a, cfg.max_saturation_rounds);
    } catch (const SaturationCapExceeded &e) {
        std::cerr << e.what() << "\n";
        return kCapExceeded;
    }
    if (cfg.output_format == "dot") {
        std::cout << to_dot(res.diagram);
        return res.bijection ? kOk : kMismatch;
    }
    const std::size_t k = a.num_blocks();
    json central = json::array();
    for (unsigned long z = 0; z < (1ul << k); ++z)
        central.push_back(pattern_string(z, k));
    json witnesses = json::array();
    for (const auto &r : res.refutations)
        witnesses.push_back(json{{"q_ranks", rank_profile(r.q).to_string()},
                                 {"orbit_size", r.cover.members.size()},
                                 {"witness", r.witness.describe()}});
    if (cfg.output_format == "json") {
        json out{{"algebra", a.spec()},
                 {"central_projections", central},
                 {"invariant_families", res.num_families},
                 {"bijection", res.bijection},
                 {"sup_lemma", res.sup_lemma},
                 {"rounds", res.rounds},
                 {"families_per_round", res.families_per_round},
                 {"contexts", res.diagram.num_contexts()},
                 {"witnesses", witnesses}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "algebra: " << a.spec() << "\n"
                  << "rounds: " << res.rounds << "\n"
                  << "contexts: " << res.diagram.num_contexts() << "\n"
                  << "central projections: " << (1ul << k) << "\n"
                  << "invariant families: " << res.num_families << "\n"
                  << "bijection: " << (res.bijection ? "true" : "false") << "\n"
                  << "sup lemma: " << (res.sup_lemma ? "true" : "false") << "\n"
                  << "refutations: " << res.refutations.size() << "\n";
        for (const auto &w : witnesses)
            std::cout << "  q " << w["q_ranks"].get<std::string>() << ": "
                      << w["witness"].get<std::string>() << "\n";
    }
    return res.bijection ? kOk : kMismatch;
}

int cmd_ks(const std::string &path, const RunConfig &cfg) {
    SpatialDiagram d;
    try {
        d = ks_diagram(load_ks(path), cfg.tolerance);
    } catch (const NotOrthonormal &e) {
        std::cerr << e.what() << "\n";
        return kBadData;
    }
    if (cfg.output_format == "dot") {
        std::cout << to_dot(d);
        return kOk;
    }
    auto sections = global_sections(d);
    if (cfg.output_format == "json") {
        json out{{"file", path},
                 {"contexts", d.num_contexts()},
                 {"count", sections.size()},
                 {"sections", to_json(sections)}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "contexts: " << d.num_contexts() << "\n"
                  << "sections: " << sections.size() << "\n";
    }
    return sections.empty() ? kEmpty : kOk;
}

int cmd_dot(const std::string &path) {
    SpatialDiagram d = diagram_from_json(read_json_file(path));
    std::cout << to_dot(d);
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Operator K-theory, ideal lattices and Kochen-Specker checks for "
                 "finite-dimensional C*-algebras"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char *env = std::getenv("NCSPEC_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception &) {
            std::cerr << "NCSPEC_SEED must be an unsigned integer\n";
            return kUsage;
        }
    }
    app.option_defaults()->always_capture_default();
    app.add_option("--tol", cfg.tolerance, "numerical tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "random seed (default: $NCSPEC_SEED or 0)");
    app.add_option("--rounds", cfg.max_saturation_rounds, "saturation round cap")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    app.add_option("--format", cfg.output_format, "output format")
        ->check(CLI::IsMember({"text", "json", "dot"}));

    std::string spec, path;
    auto *k0 = app.add_subcommand("k0", "K0 and Ktilde_f with the comparison map");
    k0->add_option("algebra", spec, "algebra, e.g. M2+M3")->required();
    auto *ideals = app.add_subcommand("ideals", "invariant partial ideals vs central projections");
    ideals->add_option("algebra", spec, "algebra, e.g. M2+M2")->required();
    auto *ks = app.add_subcommand("ks", "global sections of a Kochen-Specker file");
    ks->add_option("file", path, "JSON file {\"dim\": n, \"bases\": ...}")->required();
    auto *dot = app.add_subcommand("dot", "DOT rendering of a diagram file");
    dot->add_option("file", path, "diagram JSON file")->required();
    for (auto *sub : {k0, ideals, ks, dot})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*k0)
            return cmd_k0(spec, cfg);
        if (*ideals)
            return cmd_ideals(spec, cfg);
        if (*ks)
            return cmd_ks(path, cfg);
        return cmd_dot(path);
    } catch (const ParseError &e) {
        std::cerr << e.what() << "\n";
        return *ks || *dot ? kBadData : kUsage;
    } catch (const json::exception &e) {
        std::cerr << "malformed JSON: " << e.what() << "\n";
        return kBadData;
    } catch (const Error &e) {
        std::cerr << e.what() << "\n";
        return *ks || *dot ? kBadData : kMismatch;
    }
}
