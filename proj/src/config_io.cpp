#include "gcur/config_io.hpp"

#include "json.hpp"

#include <set>

namespace gcur {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key \"" + key + "\": " + why);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& scope) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key \"" + scope + it.key() + "\"");
}

double num(const json& j, const std::string& key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) bad(key, "must be a number");
    return j[key].get<double>();
}

int64_t integer(const json& j, const std::string& key, int64_t dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_integer()) bad(key, "must be an integer");
    return j[key].get<int64_t>();
}

std::string str(const json& j, const std::string& key, const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_string()) bad(key, "must be a string");
    return j[key].get<std::string>();
}

} // namespace

SimConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: document must be a JSON object");
    reject_unknown(j, {"Ra", "Pr", "nx", "nz", "dt", "n_steps", "formulation", "seed",
                       "replicate", "output_every", "cfl_safety", "eta_init", "blowup_factor",
                       "cov", "flux_amplitude", "initial"},
                   "");

    SimConfig cfg;
    cfg.params.Ra = num(j, "Ra", 1.0);
    cfg.params.Pr = num(j, "Pr", 1.0);
    if (!(cfg.params.Pr > 0.0)) bad("Pr", "must be > 0");
    if (!(cfg.params.Ra >= 0.0)) bad("Ra", "must be >= 0");
    cfg.nx = int(integer(j, "nx", 64));
    cfg.nz = int(integer(j, "nz", 64));
    if (cfg.nx < 4) bad("nx", "must be >= 4");
    if (cfg.nz < 4) bad("nz", "must be >= 4");
    cfg.dt = num(j, "dt", 1e-3);
    if (!(cfg.dt > 0.0)) bad("dt", "must be > 0");
    cfg.n_steps = integer(j, "n_steps", 1000);
    if (cfg.n_steps < 0) bad("n_steps", "must be >= 0");
    const std::string form = str(j, "formulation", "direct");
    if (form == "direct")
        cfg.formulation = Formulation::DirectU;
    else if (form == "homogenized")
        cfg.formulation = Formulation::HomogenizedV;
    else
        bad("formulation", "must be \"direct\" or \"homogenized\"");
    cfg.seed = uint64_t(integer(j, "seed", 1));
    cfg.replicate = uint32_t(integer(j, "replicate", 0));
    cfg.output_every = integer(j, "output_every", 10);
    if (cfg.output_every < 1) bad("output_every", "must be >= 1");
    cfg.cfl_safety = num(j, "cfl_safety", 0.5);
    if (!(cfg.cfl_safety > 0.0)) bad("cfl_safety", "must be > 0");
    const std::string einit = str(j, "eta_init", "zero");
    if (einit == "zero")
        cfg.eta_init = EtaInit::Zero;
    else if (einit == "stationary")
        cfg.eta_init = EtaInit::Stationary;
    else
        bad("eta_init", "must be \"zero\" or \"stationary\"");
    cfg.blowup_factor = num(j, "blowup_factor", 1e6);
    if (!(cfg.blowup_factor > 1.0)) bad("blowup_factor", "must be > 1");

    const double flux_amp = num(j, "flux_amplitude", 0.1);
    if (j.contains("cov")) {
        const json& c = j["cov"];
        if (!c.is_object()) bad("cov", "must be an object");
        reject_unknown(c, {"K", "sigma2", "s", "q", "f"}, "cov.");
        if (c.contains("q")) {
            if (!c["q"].is_array()) bad("cov.q", "must be an array");
            cfg.cov.q = c["q"].get<std::vector<double>>();
            for (double v : cfg.cov.q)
                if (!(v >= 0.0)) bad("cov.q", "eigenvalues must be >= 0");
            cfg.cov.f.assign(cfg.cov.q.size(), 0.0);
            if (!cfg.cov.q.empty()) cfg.cov.f[0] = flux_amp;
        } else {
            const int K = int(integer(c, "K", 32));
            if (K < 1) bad("cov.K", "must be >= 1");
            const double sigma2 = num(c, "sigma2", 4e-3);
            if (!(sigma2 >= 0.0)) bad("cov.sigma2", "must be >= 0");
            const double s = num(c, "s", 1.0);
            cfg.cov = CovarianceSpec::power_law(K, sigma2, s, flux_amp);
        }
        if (c.contains("f")) {
            if (!c["f"].is_array()) bad("cov.f", "must be an array");
            cfg.cov.f = c["f"].get<std::vector<double>>();
            if (cfg.cov.f.size() > cfg.cov.q.size())
                bad("cov.f", "more modes than the covariance truncation");
        }
    } else {
        cfg.cov = CovarianceSpec::power_law(32, 4e-3, 1.0, flux_amp);
    }

    if (j.contains("initial")) {
        const json& c = j["initial"];
        if (!c.is_object()) bad("initial", "must be an object");
        reject_unknown(c, {"kind", "field", "m", "k", "amplitude", "h_norm", "band"},
                       "initial.");
        const std::string kind = str(c, "kind", "zero");
        if (kind == "zero")
            cfg.initial.kind = InitialCondition::Kind::Zero;
        else if (kind == "eigenmode")
            cfg.initial.kind = InitialCondition::Kind::Eigenmode;
        else if (kind == "random")
            cfg.initial.kind = InitialCondition::Kind::RandomBand;
        else
            bad("initial.kind", "must be \"zero\", \"eigenmode\" or \"random\"");
        cfg.initial.field = str(c, "field", "q");
        cfg.initial.m = int(integer(c, "m", 1));
        cfg.initial.k = int(integer(c, "k", 1));
        cfg.initial.amplitude = num(c, "amplitude", 1.0);
        cfg.initial.h_norm = num(c, "h_norm", 1.0);
        cfg.initial.band = int(integer(c, "band", 8));
    }

    cfg.validate();
    return cfg;
}

std::string serialize_config(const SimConfig& cfg) {
    json j;
    j["Ra"] = cfg.params.Ra;
    j["Pr"] = cfg.params.Pr;
    j["nx"] = cfg.nx;
    j["nz"] = cfg.nz;
    j["dt"] = cfg.dt;
    j["n_steps"] = cfg.n_steps;
    j["formulation"] = cfg.formulation == Formulation::DirectU ? "direct" : "homogenized";
    j["seed"] = cfg.seed;
    j["replicate"] = cfg.replicate;
    j["output_every"] = cfg.output_every;
    j["cfl_safety"] = cfg.cfl_safety;
    j["eta_init"] = cfg.eta_init == EtaInit::Zero ? "zero" : "stationary";
    j["blowup_factor"] = cfg.blowup_factor;
    j["cov"]["q"] = cfg.cov.q;
    j["cov"]["f"] = cfg.cov.f;
    json init;
    switch (cfg.initial.kind) {
        case InitialCondition::Kind::Zero: init["kind"] = "zero"; break;
        case InitialCondition::Kind::Eigenmode: init["kind"] = "eigenmode"; break;
        case InitialCondition::Kind::RandomBand: init["kind"] = "random"; break;
    }
    init["field"] = cfg.initial.field;
    init["m"] = cfg.initial.m;
    init["k"] = cfg.initial.k;
    init["amplitude"] = cfg.initial.amplitude;
    init["h_norm"] = cfg.initial.h_norm;
    init["band"] = cfg.initial.band;
    j["initial"] = init;
    return j.dump(2);
}

} // namespace gcur
