#pragma once

// JSON schemas (format 1) for models, perturbations, lifts and reports.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "disctk/admissibility.hpp"
#include "disctk/discs.hpp"
#include "disctk/jets.hpp"
#include "disctk/linearization.hpp"
#include "disctk/model.hpp"
#include "disctk/solver.hpp"

namespace disctk {

using nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_format(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("format") || j["format"] != 1)
        throw IoError(std::string(what) + ": missing or unsupported \"format\" (want 1)");
}

inline MultiIndex read_mi(const json& j, int len, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != len)
        throw IoError(std::string(what) + ": exponent list of length " +
                      std::to_string(len) + " expected");
    MultiIndex m = MultiIndex::zero(len);
    for (int i = 0; i < len; ++i) m.e[i] = j[i].get<int>();
    return m;
}

inline json write_mi(const MultiIndex& m) {
    json a = json::array();
    for (int i = 0; i < m.size(); ++i) a.push_back(m[i]);
    return a;
}

}  // namespace detail

inline Model model_from_json(const json& j) {
    detail::require_format(j, "model");
    int n = j.at("n").get<int>();
    int d = j.at("d").get<int>();
    std::vector<std::optional<HermitianPoly>> comps;
    for (const json& cj : j.at("components")) {
        if (cj.value("zero", false)) {
            comps.push_back(std::nullopt);
            continue;
        }
        int D = cj.at("D").get<int>();
        int k = cj.value("k", -1);
        std::vector<std::tuple<MultiIndex, MultiIndex, cplx>> terms;
        for (const json& tj : cj.at("terms"))
            terms.emplace_back(detail::read_mi(tj.at("I"), n, "model term"),
                               detail::read_mi(tj.at("J"), n, "model term"),
                               cplx(tj.value("re", 0.0), tj.value("im", 0.0)));
        comps.emplace_back(HermitianPoly(n, D, terms, true, k));
    }
    return Model(n, d, std::move(comps));
}

inline json model_to_json(const Model& m) {
    json j{{"format", 1}, {"n", m.n()}, {"d", m.d()}};
    j["components"] = json::array();
    for (int l = 0; l < m.d(); ++l) {
        if (m.component_is_zero(l)) {
            j["components"].push_back({{"zero", true}});
            continue;
        }
        const HermitianPoly& h = m.component(l);
        json cj{{"zero", false}, {"D", h.degree()}, {"k", h.weight()}};
        cj["terms"] = json::array();
        // Stored terms are already mirrored; emit the upper half plus the
        // diagonal so a reload mirrors back to the same polynomial.
        for (const auto& [key, c] : h.poly().terms()) {
            if (key.second < key.first) continue;
            cj["terms"].push_back({{"I", detail::write_mi(key.first)},
                                   {"J", detail::write_mi(key.second)},
                                   {"re", c.real()},
                                   {"im", c.imag()}});
        }
        j["components"].push_back(cj);
    }
    return j;
}

inline Perturbation perturbation_from_json(const Model& m, const json& j) {
    detail::require_format(j, "perturbation");
    double scale = j.value("scale", 1.0);
    std::vector<std::vector<PerturbationTerm>> per(m.d());
    const json& comps = j.at("components");
    if (static_cast<int>(comps.size()) != m.d())
        throw IoError("perturbation: component count != d");
    for (int l = 0; l < m.d(); ++l) {
        for (const json& tj : comps[l]) {
            PerturbationTerm t;
            t.I = detail::read_mi(tj.at("I"), m.n(), "perturbation term");
            t.J = detail::read_mi(tj.at("J"), m.n(), "perturbation term");
            t.S = detail::read_mi(tj.at("S"), m.d(), "perturbation term");
            for (const json& cj : tj.at("coeffs"))
                t.coeff.emplace_back(detail::read_mi(cj.at("A"), m.n(), "coefficient"),
                                     detail::read_mi(cj.at("T"), m.d(), "coefficient"),
                                     cplx(cj.value("re", 0.0), cj.value("im", 0.0)));
            per[l].push_back(std::move(t));
        }
    }
    return Perturbation(m, std::move(per), scale);
}

inline json disc_to_json(const ConstrainedDisc& c) {
    json core = json::array();
    for (cplx a : c.core()) core.push_back({a.real(), a.imag()});
    return json{{"order", c.order()}, {"core", core}};
}

inline ConstrainedDisc disc_from_json(const json& j) {
    std::vector<cplx> core;
    for (const json& a : j.at("core")) core.emplace_back(a[0].get<double>(), a[1].get<double>());
    return ConstrainedDisc(j.at("order").get<int>(), std::move(core));
}

inline json lift_to_json(const Lift& L) {
    json j{{"format", 1}};
    auto pack = [](const std::vector<ConstrainedDisc>& v) {
        json a = json::array();
        for (const auto& c : v) a.push_back(disc_to_json(c));
        return a;
    };
    j["components"] = json{{"h", pack(L.h)}, {"g", pack(L.g)}, {"ht", pack(L.ht)},
                           {"gt", pack(L.gt)}};
    return j;
}

inline Lift lift_from_json(const json& j) {
    detail::require_format(j, "lift");
    Lift L;
    const json& c = j.at("components");
    for (const json& x : c.at("h")) L.h.push_back(disc_from_json(x));
    for (const json& x : c.at("g")) L.g.push_back(disc_from_json(x));
    for (const json& x : c.at("ht")) L.ht.push_back(disc_from_json(x));
    for (const json& x : c.at("gt")) L.gt.push_back(disc_from_json(x));
    return L;
}

inline json pair_to_json(const CandidatePair& p) {
    json V = json::array();
    for (cplx v : p.V) V.push_back({v.real(), v.imag()});
    return json{{"c", p.c}, {"V", V}};
}

inline json to_json(const AdmissibilityReport& r) {
    return json{{"verdict", r.verdict},
                {"identically_singular", r.identically_singular},
                {"nearest_root_dist", r.nearest_root_dist},
                {"min_abs_detQ", r.min_modulus}};
}

inline json to_json(const IndexReport& r) {
    return json{{"wind_detQ", r.wind_detQ}, {"ind", r.ind},     {"maslov", r.maslov},
                {"m", r.m},                 {"pinned", r.pinned}};
}

inline json to_json(const StationarityCheck& c) {
    return json{{"max_violation", c.max_violation},
                {"worst_angle", c.worst_angle},
                {"pass", c.pass}};
}

inline json to_json(const StationarityReport& r) {
    return json{{"attachment", to_json(r.attachment)},
                {"conormal", to_json(r.conormal)},
                {"holomorphy", to_json(r.holomorphy)},
                {"nonvanishing", to_json(r.nonvanishing)},
                {"nonconstant", r.nonconstant},
                {"tol", r.tol},
                {"pass", r.pass}};
}

inline json to_json(const KernelReport& r, bool with_basis = false) {
    json j{{"nullity", r.nullity},   {"conclusive", r.conclusive},
           {"gap", r.gap},           {"truncations", r.truncations},
           {"expected_m", r.expected_m}, {"match", r.match},
           {"note", r.note}};
    if (with_basis) {
        j["basis"] = json::array();
        for (const Lift& b : r.basis) j["basis"].push_back(lift_to_json(b));
    }
    return j;
}

inline json to_json(const PartialIndices& r) {
    return json{{"indices", r.indices},
                {"sum", r.sum},
                {"conclusive", r.conclusive},
                {"note", r.note},
                {"profile", r.profile},
                {"window_lo", r.window_lo}};
}

inline json to_json(const JetRankReport& r) {
    return json{{"l0", r.l0},       {"rank", r.rank},
                {"expected", r.expected}, {"gap", r.gap},
                {"conclusive", r.conclusive}, {"pass", r.pass},
                {"note", r.note}};
}

inline json to_json(const SolveRecord& r) {
    return json{{"iterations", r.iterations},
                {"final_residual", r.final_residual},
                {"history", r.history}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace disctk
