// Command-line front end: JSON in, JSON/CSV out.
// Exit codes: 0 success/PASS, 2 mathematical FAIL, 3 inconclusive, 1 usage/IO.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "disctk/io.hpp"

using namespace disctk;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kExitOk = 0, kExitUsage = 1, kExitFail = 2, kExitInconclusive = 3;

int thread_cap() {
    const char* env = std::getenv("DISC_TOOLKIT_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v > 0 ? v : 1;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                   const json& overrides, std::uint64_t seed = 0) {
    return json{{"command", command}, {"inputs", inputs},   {"seed", seed},
                {"overrides", overrides}, {"version", kVersion},
                {"timestamp", timestamp()}, {"threads", thread_cap()}};
}

void emit(const json& payload, const std::string& out_path) {
    if (out_path.empty())
        std::cout << payload.dump(2) << "\n";
    else
        save_json_file(out_path, payload);
}

CandidatePair parse_pair(const Model& m, const std::vector<double>& c,
                         const std::vector<double>& v) {
    if (static_cast<int>(c.size()) != m.d())
        throw CLI::ValidationError("--c needs " + std::to_string(m.d()) + " reals");
    if (static_cast<int>(v.size()) != 2 * m.n())
        throw CLI::ValidationError("--V needs " + std::to_string(2 * m.n()) +
                                   " reals (re, im pairs)");
    CandidatePair p;
    p.c = c;
    for (int i = 0; i < m.n(); ++i) p.V.emplace_back(v[2 * i], v[2 * i + 1]);
    return p;
}

void write_plot(const std::string& path, const LaurentPoly& detq) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write " + path);
    std::fprintf(f, "theta,abs_detQ\n");
    BoundaryGrid grid(1024);
    for (int j = 0; j < grid.size(); ++j)
        std::fprintf(f, "%.6g,%.6g\n", grid.angle(j), std::abs(detq.eval(grid.point(j))));
    std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary-disc toolkit for degenerate polynomial models"};
    app.require_subcommand(1);

    std::string model_path, pert_path, start_path, out_path, plot_path, history_path;
    std::vector<double> c_arg, v_arg;
    bool do_search = false, pinned = false, with_basis = false, family = false;
    int budget = 64, N = 24, max_iter = 30;
    std::uint64_t seed = 0;
    double epsilon = -1.0, target = 1e-10, radius = 0.01;

    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("model", model_path, "model JSON file")->required();
    };
    auto add_pair = [&](CLI::App* cmd, bool required) {
        auto* oc = cmd->add_option("--c", c_arg, "pair weights c (d reals)");
        auto* ov = cmd->add_option("--V", v_arg, "direction V (2n reals, re im pairs)");
        oc->delimiter(',');
        ov->delimiter(',');
        if (required) {
            oc->required();
            ov->required();
        }
    };

    auto* validate = app.add_subcommand("validate", "check a model file");
    add_model(validate);
    validate->add_option("--out", out_path, "payload destination");

    auto* admissible =
        app.add_subcommand("admissible", "admissibility of a pair, or a seeded search");
    add_model(admissible);
    add_pair(admissible, false);
    admissible->add_flag("--search", do_search, "randomized pair search");
    admissible->add_option("--budget", budget, "search budget");
    admissible->add_option("--seed", seed, "search seed");
    admissible->add_option("--emit-plot", plot_path, "CSV of theta, |det Q|");
    admissible->add_option("--out", out_path, "payload destination");

    auto* index = app.add_subcommand("index", "index bookkeeping of an admissible pair");
    add_model(index);
    add_pair(index, true);
    index->add_option("--out", out_path, "payload destination");

    auto* disc = app.add_subcommand("disc", "initial lift and stationarity report");
    add_model(disc);
    add_pair(disc, true);
    disc->add_option("--out", out_path, "payload destination");

    auto* kernelc = app.add_subcommand("kernel", "nullity of the linearized operator");
    add_model(kernelc);
    add_pair(kernelc, true);
    kernelc->add_option("--N", N, "truncation degree");
    kernelc->add_flag("--pinned", pinned, "pin g~(1)");
    kernelc->add_flag("--with-basis", with_basis, "export the kernel basis");
    kernelc->add_option("--out", out_path, "payload destination");

    auto* indices = app.add_subcommand("indices", "partial indices and jet order");
    add_model(indices);
    add_pair(indices, true);
    indices->add_option("--out", out_path, "payload destination");

    auto* solvec = app.add_subcommand("solve", "Gauss-Newton solve, optional family chart");
    add_model(solvec);
    add_pair(solvec, true);
    solvec->add_option("--perturbation", pert_path, "perturbation JSON file");
    solvec->add_option("--epsilon", epsilon, "perturbation scale override");
    solvec->add_option("--start", start_path, "start lift JSON (default: initial lift)");
    solvec->add_option("--N", N, "truncation degree");
    solvec->add_option("--max-iter", max_iter, "iteration cap");
    solvec->add_option("--target", target, "residual target");
    solvec->add_flag("--pinned", pinned, "pin g~(1)");
    solvec->add_flag("--family", family, "chart the solution family");
    solvec->add_option("--radius", radius, "family axis radius");
    solvec->add_option("--history", history_path, "CSV of iter, max_residual");
    solvec->add_option("--out", out_path, "payload destination");

    auto* jetsc = app.add_subcommand("jets", "jet injectivity on the kernel basis");
    add_model(jetsc);
    add_pair(jetsc, true);
    jetsc->add_option("--out", out_path, "payload destination");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            json payload;
            payload["manifest"] = make_manifest("validate", {model_path}, json::object());
            try {
                Model m = model_from_json(load_json_file(model_path));
                auto rep = m.validate();
                payload["valid"] = true;
                payload["D1"] = rep.D1;
                payload["Dd"] = rep.Dd;
                payload["k0"] = rep.k0;
                payload["component_k"] = rep.component_k;
                payload["component_D"] = rep.component_D;
                emit(payload, out_path);
                return kExitOk;
            } catch (const std::invalid_argument& e) {
                payload["valid"] = false;
                payload["errors"] = {e.what()};
                emit(payload, out_path);
                return kExitFail;
            }
        }

        if (admissible->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            json overrides{{"search", do_search}, {"budget", budget}};
            json payload;
            payload["manifest"] =
                make_manifest("admissible", {model_path}, overrides, seed);
            if (do_search) {
                auto hits = search_pairs(m, budget, seed);
                payload["results"] = json::array();
                for (const auto& h : hits)
                    payload["results"].push_back({{"pair", pair_to_json(h.pair)},
                                                  {"score", h.score},
                                                  {"admissible", h.admissible}});
                bool any = !hits.empty() && hits.front().admissible;
                payload["verdict"] = any;
                emit(payload, out_path);
                return any ? kExitOk : kExitFail;
            }
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            auto rep = check_admissible(m, p);
            payload["pair"] = pair_to_json(p);
            payload.update(to_json(rep));
            if (!plot_path.empty()) write_plot(plot_path, rep.detQ);
            emit(payload, out_path);
            return rep.verdict ? kExitOk : kExitFail;
        }

        if (index->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            json payload;
            payload["manifest"] = make_manifest("index", {model_path}, json::object());
            payload["pair"] = pair_to_json(p);
            try {
                payload.update(to_json(index_report(m, p)));
            } catch (const std::invalid_argument& e) {
                std::cerr << "index: " << e.what() << "\n";
                return kExitFail;
            }
            emit(payload, out_path);
            return kExitOk;
        }

        if (disc->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            Lift L = initial_lift(m, p);
            LiftedDefiningSystem sys(m);
            auto rep = verify_stationary(sys, L, m.k0());
            json payload;
            payload["manifest"] = make_manifest("disc", {model_path}, json::object());
            payload["pair"] = pair_to_json(p);
            payload["lift"] = lift_to_json(L);
            payload["stationarity"] = to_json(rep);
            emit(payload, out_path);
            return rep.pass ? kExitOk : kExitFail;
        }

        if (kernelc->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            auto op = assemble_G(m, p);
            op.N = N;
            op.pinned = pinned;
            int expected = -1;
            if (check_admissible(m, p).verdict) expected = index_report(m, p).m;
            auto rep = kernel(op, expected);
            json payload;
            payload["manifest"] = make_manifest(
                "kernel", {model_path}, json{{"N", N}, {"pinned", pinned}});
            payload["pair"] = pair_to_json(p);
            payload.update(to_json(rep, with_basis));
            emit(payload, out_path);
            if (!rep.conclusive) return kExitInconclusive;
            return (expected < 0 || rep.match) ? kExitOk : kExitFail;
        }

        if (indices->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            auto op = assemble_G(m, p);
            auto pi = partial_indices(op);
            json payload;
            payload["manifest"] = make_manifest("indices", {model_path}, json::object());
            payload["pair"] = pair_to_json(p);
            payload.update(to_json(pi));
            if (pi.conclusive) payload["jet_order"] = jet_order(m.k0(), pi);
            emit(payload, out_path);
            return pi.conclusive ? kExitOk : kExitInconclusive;
        }

        if (solvec->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            Perturbation th = Perturbation::zero(m);
            if (!pert_path.empty()) {
                json pj = load_json_file(pert_path);
                if (epsilon >= 0.0) pj["scale"] = epsilon;
                th = perturbation_from_json(m, pj);
            }
            LiftedDefiningSystem sys(m, th);
            Lift start = start_path.empty() ? initial_lift(m, p)
                                            : lift_from_json(load_json_file(start_path));
            SolveConfig cfg;
            cfg.N = N;
            cfg.max_iter = max_iter;
            cfg.target = target;
            cfg.pinned = pinned;
            json overrides{{"N", N},       {"max_iter", max_iter}, {"target", target},
                           {"pinned", pinned}, {"epsilon", epsilon},   {"family", family}};
            json payload;
            std::vector<std::string> inputs{model_path};
            if (!pert_path.empty()) inputs.push_back(pert_path);
            if (!start_path.empty()) inputs.push_back(start_path);
            payload["manifest"] = make_manifest("solve", inputs, overrides);
            payload["pair"] = pair_to_json(p);
            try {
                SolveRecord rec;
                Lift out = solve(sys, start, cfg, &rec);
                payload["lift"] = lift_to_json(out);
                payload["record"] = to_json(rec);
                if (!history_path.empty()) {
                    std::FILE* f = std::fopen(history_path.c_str(), "w");
                    if (!f) throw IoError("cannot write " + history_path);
                    std::fprintf(f, "iter,max_residual\n");
                    for (size_t i = 0; i < rec.history.size(); ++i)
                        std::fprintf(f, "%zu,%.6g\n", i, rec.history[i]);
                    std::fclose(f);
                }
                if (family) {
                    auto op = assemble_G(m, p);
                    op.pinned = pinned;
                    auto ker = kernel(op);
                    if (!ker.conclusive) {
                        std::cerr << "solve: kernel inconclusive: " << ker.note << "\n";
                        return kExitInconclusive;
                    }
                    DiscFamily fam = family_chart(sys, out, ker.basis, cfg, radius);
                    json fj{{"m", fam.m},
                            {"evaluation_rank", evaluation_rank(fam)},
                            {"sampled_residuals", fam.sampled_residuals}};
                    payload["family"] = fj;
                }
                emit(payload, out_path);
                return kExitOk;
            } catch (const SolveError& e) {
                std::cerr << "solve: " << e.what() << "\n";
                return kExitFail;
            }
        }

        if (jetsc->parsed()) {
            Model m = model_from_json(load_json_file(model_path));
            CandidatePair p = parse_pair(m, c_arg, v_arg);
            auto op = assemble_G(m, p);
            auto pi = partial_indices(op);
            json payload;
            payload["manifest"] = make_manifest("jets", {model_path}, json::object());
            payload["pair"] = pair_to_json(p);
            if (!pi.conclusive) {
                payload["note"] = "partial indices inconclusive: " + pi.note;
                emit(payload, out_path);
                return kExitInconclusive;
            }
            int l0 = jet_order(m.k0(), pi);
            int expected = check_admissible(m, p).verdict ? index_report(m, p).m : -1;
            auto ker = kernel(op, expected);
            if (!ker.conclusive) {
                payload["note"] = "kernel inconclusive: " + ker.note;
                emit(payload, out_path);
                return kExitInconclusive;
            }
            auto rep = jet_injectivity(ker.basis, l0);
            payload["jet_order"] = l0;
            payload.update(to_json(rep));
            double sym = 0.0;
            for (const Lift& b : ker.basis)
                sym = std::max(sym, gtilde_symmetry_violation(b, m.k0()));
            payload["gtilde_symmetry_violation"] = sym;
            emit(payload, out_path);
            if (!rep.conclusive) return kExitInconclusive;
            return rep.pass ? kExitOk : kExitFail;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
