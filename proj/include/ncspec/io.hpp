#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abelian.hpp"
#include "algebra.hpp"
#include "contexts.hpp"
#include "errors.hpp"
#include "foundations.hpp"

namespace ncspec {

using json = nlohmann::json;

namespace detail {

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json &j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("complex entry must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json bigint_to_json(const BigInt &x) {
    if (x >= std::numeric_limits<long long>::min() && x <= std::numeric_limits<long long>::max())
        return json(static_cast<long long>(x));
    return json(x.str());
}

inline BigInt bigint_from_json(const json &j) {
    if (j.is_number_integer())
        return BigInt(j.get<long long>());
    if (j.is_string()) {
        try {
            return BigInt(j.get<std::string>());
        } catch (const std::exception &) {
        }
    }
    throw ParseError("integer entry must be a number or a decimal string");
}

inline const json &field(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Elements

/// Blocks as nested arrays: blocks[i][row][col] = [re, im].
inline json blocks_to_json(const Element &e) {
    json out = json::array();
    for (const auto &b : e.blocks()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < b.cols(); ++c)
                row.push_back(detail::complex_to_json(b(r, c)));
            rows.push_back(std::move(row));
        }
        out.push_back(std::move(rows));
    }
    return out;
}

inline Element blocks_from_json(const FdAlgebra &a, const json &j) {
    if (!j.is_array() || j.size() != a.num_blocks())
        throw ParseError("expected " + std::to_string(a.num_blocks()) + " blocks");
    Element e = Element::zero(a);
    for (std::size_t i = 0; i < a.num_blocks(); ++i) {
        const int n = a.block_size(i);
        const json &rows = j[i];
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
            throw ParseError("block " + std::to_string(i) + " needs " + std::to_string(n) + " rows");
        for (int r = 0; r < n; ++r) {
            if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(n))
                throw ParseError("block " + std::to_string(i) + " row " + std::to_string(r) +
                                 " needs " + std::to_string(n) + " entries");
            for (int c = 0; c < n; ++c)
                e.block(i)(r, c) = detail::complex_from_json(rows[r][c]);
        }
    }
    return e;
}

inline json to_json(const Element &e) {
    return json{{"algebra", e.algebra().spec()}, {"blocks", blocks_to_json(e)}};
}

inline Element element_from_json(const json &j) {
    FdAlgebra a = FdAlgebra::parse(detail::field(j, "algebra").get<std::string>());
    return blocks_from_json(a, detail::field(j, "blocks"));
}

// ---------------------------------------------------------------------------
// Contexts and diagrams

inline json to_json(const Context &v) {
    json atoms = json::array();
    for (const auto &p : v.atoms())
        atoms.push_back(blocks_to_json(p.element()));
    return json{{"ids", v.ids()}, {"atoms", std::move(atoms)}};
}

inline Context context_from_json(const FdAlgebra &a, const json &j) {
    const json &atoms = detail::field(j, "atoms");
    if (!atoms.is_array())
        throw ParseError("\"atoms\" must be an array");
    std::vector<Projection> ps;
    for (const auto &x : atoms)
        ps.emplace_back(blocks_from_json(a, x));
    return Context(a, ps);
}

inline json to_json(const SpatialDiagram &d) {
    json contexts = json::array();
    for (const auto &v : d.contexts())
        contexts.push_back(to_json(v));
    json arrows = json::array();
    for (const auto &a : d.arrows())
        arrows.push_back(json{{"src", a.src},
                              {"dst", a.dst},
                              {"kind", to_string(a.kind)},
                              {"u", blocks_to_json(a.u.element())}});
    return json{{"algebra", d.algebra().spec()},
                {"contexts", std::move(contexts)},
                {"arrows", std::move(arrows)}};
}

inline ArrowKind arrow_kind_from_string(const std::string &s) {
    for (ArrowKind k : {ArrowKind::Identity, ArrowKind::Inclusion, ArrowKind::Ad})
        if (s == to_string(k))
            return k;
    throw ParseError("unknown arrow kind \"" + s + "\"");
}

/// Contexts and arrows are taken verbatim, then validated. Identity arrows
/// are added for contexts whose file omits them.
inline SpatialDiagram diagram_from_json(const json &j) {
    FdAlgebra a = FdAlgebra::parse(detail::field(j, "algebra").get<std::string>());
    SpatialDiagram d(a);
    for (const auto &c : detail::field(j, "contexts"))
        d.push_raw(context_from_json(a, c));
    std::vector<char> has_id(d.num_contexts(), 0);
    if (j.contains("arrows")) {
        for (const auto &x : j.at("arrows")) {
            std::size_t src = detail::field(x, "src").get<std::size_t>();
            std::size_t dst = detail::field(x, "dst").get<std::size_t>();
            ArrowKind kind = arrow_kind_from_string(detail::field(x, "kind").get<std::string>());
            Unitary u = x.contains("u") ? Unitary(blocks_from_json(a, x.at("u")))
                                        : Unitary::identity(a);
            if (src >= d.num_contexts() || dst >= d.num_contexts())
                throw ParseError("arrow endpoint out of range");
            if (kind == ArrowKind::Identity && src == dst)
                has_id[src] = 1;
            d.push_raw(SpatialArrow{src, dst, u, kind});
        }
    }
    for (std::size_t i = 0; i < has_id.size(); ++i)
        if (!has_id[i])
            d.push_raw(SpatialArrow{i, i, Unitary::identity(a), ArrowKind::Identity});
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------
// Abelian presentations

inline json to_json(const IntMatrix &m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back(detail::bigint_to_json(m(i, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline IntMatrix int_matrix_from_json(const json &j, std::size_t cols) {
    if (!j.is_array())
        throw ParseError("integer matrix must be an array of rows");
    IntMatrix m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError("row " + std::to_string(i) + " needs " + std::to_string(cols) +
                             " entries");
        for (std::size_t c = 0; c < cols; ++c)
            m(i, c) = detail::bigint_from_json(j[i][c]);
    }
    return m;
}

inline json to_json(const AbPresentation &p) {
    return json{{"generators", p.num_generators}, {"relations", to_json(p.relations)}};
}

inline AbPresentation presentation_from_json(const json &j) {
    std::size_t n = detail::field(j, "generators").get<std::size_t>();
    return AbPresentation(n, int_matrix_from_json(detail::field(j, "relations"), n));
}

inline json group_summary(const AbGroup &g) {
    json factors = json::array();
    for (const auto &f : g.invariant_factors())
        factors.push_back(detail::bigint_to_json(f));
    return json{{"group", g.factors_string()},
                {"invariant_factors", std::move(factors)},
                {"free_rank", g.free_rank()}};
}

// ---------------------------------------------------------------------------
// Kochen-Specker files: {"dim": n, "bases": [[[re, im], ...], ...]}

struct KsInstance {
    int dim = 0;
    std::vector<std::vector<CVector>> bases;
};

inline KsInstance ks_from_json(const json &j) {
    KsInstance ks;
    const json &dim = detail::field(j, "dim");
    if (!dim.is_number_integer() || dim.get<long long>() < 1)
        throw ParseError("\"dim\" must be a positive integer");
    ks.dim = dim.get<int>();
    const json &bases = detail::field(j, "bases");
    if (!bases.is_array())
        throw ParseError("\"bases\" must be an array");
    for (const auto &b : bases) {
        if (!b.is_array())
            throw ParseError("each basis must be an array of vectors");
        std::vector<CVector> basis;
        for (const auto &v : b) {
            if (!v.is_array())
                throw ParseError("each vector must be an array of [re, im]");
            CVector x(static_cast<Eigen::Index>(v.size()));
            for (std::size_t c = 0; c < v.size(); ++c)
                x(static_cast<Eigen::Index>(c)) = detail::complex_from_json(v[c]);
            basis.push_back(std::move(x));
        }
        ks.bases.push_back(std::move(basis));
    }
    return ks;
}

inline json to_json(const KsInstance &ks) {
    json bases = json::array();
    for (const auto &b : ks.bases) {
        json basis = json::array();
        for (const auto &v : b) {
            json vec = json::array();
            for (Eigen::Index c = 0; c < v.size(); ++c)
                vec.push_back(detail::complex_to_json(v(c)));
            basis.push_back(std::move(vec));
        }
        bases.push_back(std::move(basis));
    }
    return json{{"dim", ks.dim}, {"bases", std::move(bases)}};
}

inline json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline KsInstance load_ks(const std::string &path) { return ks_from_json(read_json_file(path)); }

inline SpatialDiagram ks_diagram(const KsInstance &ks, double tol = kDefaultTolerance) {
    return ks_diagram(ks.dim, ks.bases, tol);
}

// ---------------------------------------------------------------------------
// Sections and distributions

inline json to_json(const std::vector<ValuationSection> &sections) {
    json out = json::array();
    for (const auto &s : sections)
        out.push_back(s.ids);
    return out;
}

inline json to_json(const DistributionFamily &f) { return json(f.probs); }

} // namespace ncspec
