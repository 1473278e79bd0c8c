#include "beamlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "beamlab/errors.hpp"

namespace beamlab {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"model", {"alpha", "beta", "b0", "p"}},
        {"profile", {"c0", "omega0", "z_max", "nodes", "tol", "fit_lo", "fit_hi"}},
        {"weight", {"y_max", "nodes", "quad_tol", "cutoff"}},
        {"grid", {"L", "dx", "dt_factor", "margin"}},
        {"selfsim", {"y_max", "nodes"}},
        {"run", {"t0", "span", "t_end", "snapshot_ds", "export_every", "nonlinear", "blowup_factor"}},
        {"perturbation", {"delta", "width", "center", "applies_to"}},
        {"energy", {"rho", "vartheta", "zeta", "omega", "fit_lo", "fit_hi", "h_window_lo", "identity_value_scale", "M"}},
        {"output", {"directory", "formats"}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    std::optional<double> number(const std::string& section, const std::string& key) const {
        auto v = raw(section, key);
        if (!v) return std::nullopt;
        const std::string& s = *v;
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError("key " + section + "." + key + " is not a number: '" + s + "'");
        }
        return out;
    }

    double required(const std::string& section, const std::string& key) const {
        auto v = number(section, key);
        if (!v) throw ConfigError("missing required key " + section + "." + key);
        return *v;
    }

    void read(const std::string& section, const std::string& key, double& dst) const {
        if (auto v = number(section, key)) dst = *v;
    }

    void read(const std::string& section, const std::string& key, std::size_t& dst) const {
        if (auto v = number(section, key)) {
            if (*v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
                throw ConfigError("key " + section + "." + key + " must be a non-negative integer");
            }
            dst = static_cast<std::size_t>(*v);
        }
    }

    void read(const std::string& section, const std::string& key, bool& dst) const {
        if (auto v = raw(section, key)) {
            if (*v == "true" || *v == "1" || *v == "yes") {
                dst = true;
            } else if (*v == "false" || *v == "0" || *v == "no") {
                dst = false;
            } else {
                throw ConfigError("key " + section + "." + key + " must be true or false");
            }
        }
    }

private:
    const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        auto it = schema().find(section);
        if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
        if (!body.data().empty()) throw ConfigError("key " + section + " outside of any section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
        }
    }
}

// Shortest representation that reads back to the same double.
std::string exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const char* target_name(PerturbTarget t) {
    switch (t) {
        case PerturbTarget::u: return "u";
        case PerturbTarget::ut: return "ut";
        case PerturbTarget::both: return "both";
    }
    return "u";
}

}  // namespace

double ExperimentConfig::t_final() const {
    if (run.t_end) return *run.t_end;
    return t_of_s(model, s_of_t(model, run.t0) + run.span);
}

void ExperimentConfig::validate() const {
    try {
        model.validate();
        energy.weights.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(target.value > 0.0)) throw ConfigError("profile target must be positive");
    if (!(profile.z_max > 0.0) || profile.n_nodes < 5) throw ConfigError("profile.z_max/nodes out of range");
    if (!(profile.tol > 0.0)) throw ConfigError("profile.tol must be positive");
    if (!(weight.y_max > 0.0) || weight.nodes < 5) throw ConfigError("weight.y_max/nodes out of range");
    if (!(grid.L >= 0.0) || !(grid.dx > 0.0) || !(grid.dt_factor > 0.0) || !(grid.margin >= 1.0)) {
        throw ConfigError("grid block out of range (L >= 0, dx > 0, dt_factor > 0, margin >= 1)");
    }
    if (!(selfsim.y_max > 0.0) || selfsim.nodes < 5 || selfsim.nodes % 2 == 0) {
        throw ConfigError("selfsim.nodes must be odd and >= 5");
    }
    if (!(run.t0 >= 1.0)) throw ConfigError("run.t0 must be >= 1");
    if (run.t_end && !(*run.t_end > run.t0)) throw ConfigError("run.t_end must exceed run.t0");
    if (!run.t_end && !(run.span > 0.0)) throw ConfigError("run.span must be positive");
    if (!(run.snapshot_ds > 0.0)) throw ConfigError("run.snapshot_ds must be positive");
    if (!(perturbation.width > 0.0) || !(perturbation.amplitude >= 0.0)) {
        throw ConfigError("perturbation.delta must be >= 0 and width > 0");
    }
    if (energy.M && !(*energy.M > 0.0)) throw ConfigError("energy.M must be positive");
    if (output_dir.empty()) throw ConfigError("output.directory must not be empty");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.message() + " at line " +
                          std::to_string(e.line()));
    }
    check_keys(tree);
    Reader r(tree);
    ExperimentConfig c;
    c.source = source;

    c.model.alpha = r.required("model", "alpha");
    c.model.beta = r.required("model", "beta");
    c.model.b0 = r.required("model", "b0");
    c.model.p = r.required("model", "p");

    const auto c0 = r.number("profile", "c0");
    const auto om0 = r.number("profile", "omega0");
    if (c0 && om0) throw ConfigError("profile.c0 and profile.omega0 are mutually exclusive");
    if (om0) c.target = ProfileTarget::from_omega0(*om0);
    if (c0) c.target = ProfileTarget::from_c0(*c0);
    r.read("profile", "z_max", c.profile.z_max);
    r.read("profile", "nodes", c.profile.n_nodes);
    r.read("profile", "tol", c.profile.tol);
    r.read("profile", "fit_lo", c.fit_window_lo);
    r.read("profile", "fit_hi", c.fit_window_hi);

    r.read("weight", "y_max", c.weight.y_max);
    r.read("weight", "nodes", c.weight.nodes);
    r.read("weight", "quad_tol", c.weight.options.quad_tol);
    r.read("weight", "cutoff", c.weight.options.cutoff);

    if (auto L = r.raw("grid", "L"); L && *L != "auto") r.read("grid", "L", c.grid.L);
    r.read("grid", "dx", c.grid.dx);
    r.read("grid", "dt_factor", c.grid.dt_factor);
    r.read("grid", "margin", c.grid.margin);

    r.read("selfsim", "y_max", c.selfsim.y_max);
    r.read("selfsim", "nodes", c.selfsim.nodes);

    r.read("run", "t0", c.run.t0);
    r.read("run", "span", c.run.span);
    c.run.t_end = r.number("run", "t_end");
    r.read("run", "snapshot_ds", c.run.snapshot_ds);
    r.read("run", "export_every", c.run.export_every);
    r.read("run", "nonlinear", c.run.nonlinear);
    r.read("run", "blowup_factor", c.run.blowup_factor);

    r.read("perturbation", "delta", c.perturbation.amplitude);
    r.read("perturbation", "width", c.perturbation.width);
    r.read("perturbation", "center", c.perturbation.center);
    if (auto a = r.raw("perturbation", "applies_to")) {
        if (*a == "u") {
            c.perturbation.applies_to = PerturbTarget::u;
        } else if (*a == "ut") {
            c.perturbation.applies_to = PerturbTarget::ut;
        } else if (*a == "both") {
            c.perturbation.applies_to = PerturbTarget::both;
        } else {
            throw ConfigError("perturbation.applies_to must be u, ut or both");
        }
    }

    r.read("energy", "rho", c.energy.weights.rho);
    r.read("energy", "vartheta", c.energy.weights.vartheta);
    r.read("energy", "zeta", c.energy.weights.zeta);
    r.read("energy", "omega", c.energy.weights.omega_w);
    r.read("energy", "fit_lo", c.energy.fit_lo);
    c.energy.fit_hi = r.number("energy", "fit_hi");
    r.read("energy", "h_window_lo", c.energy.h_window_lo);
    r.read("energy", "identity_value_scale", c.energy.identity_value_scale);
    c.energy.M = r.number("energy", "M");

    if (auto d = r.raw("output", "directory")) c.output_dir = *d;
    if (auto f = r.raw("output", "formats")) {
        c.write_csv = f->find("csv") != std::string::npos;
        c.write_json = f->find("json") != std::string::npos;
        if (!c.write_csv && !c.write_json) throw ConfigError("output.formats must list csv and/or json");
    }

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string config_to_ini(const ExperimentConfig& c) {
    std::ostringstream o;
    auto kv = [&](const char* k, double v) { o << k << " = " << exact(v) << "\n"; };
    o << "[model]\n";
    kv("alpha", c.model.alpha);
    kv("beta", c.model.beta);
    kv("b0", c.model.b0);
    kv("p", c.model.p);
    o << "\n[profile]\n";
    kv(c.target.kind == ProfileTarget::Kind::c0 ? "c0" : "omega0", c.target.value);
    kv("z_max", c.profile.z_max);
    o << "nodes = " << c.profile.n_nodes << "\n";
    kv("tol", c.profile.tol);
    if (c.fit_window_hi > 0.0) {
        kv("fit_lo", c.fit_window_lo);
        kv("fit_hi", c.fit_window_hi);
    }
    o << "\n[weight]\n";
    kv("y_max", c.weight.y_max);
    o << "nodes = " << c.weight.nodes << "\n";
    kv("quad_tol", c.weight.options.quad_tol);
    kv("cutoff", c.weight.options.cutoff);
    o << "\n[grid]\n";
    if (c.grid.L > 0.0) {
        kv("L", c.grid.L);
    } else {
        o << "L = auto\n";
    }
    kv("dx", c.grid.dx);
    kv("dt_factor", c.grid.dt_factor);
    kv("margin", c.grid.margin);
    o << "\n[selfsim]\n";
    kv("y_max", c.selfsim.y_max);
    o << "nodes = " << c.selfsim.nodes << "\n";
    o << "\n[run]\n";
    kv("t0", c.run.t0);
    if (c.run.t_end) {
        kv("t_end", *c.run.t_end);
    } else {
        kv("span", c.run.span);
    }
    kv("snapshot_ds", c.run.snapshot_ds);
    o << "export_every = " << c.run.export_every << "\n";
    o << "nonlinear = " << (c.run.nonlinear ? "true" : "false") << "\n";
    kv("blowup_factor", c.run.blowup_factor);
    o << "\n[perturbation]\n";
    kv("delta", c.perturbation.amplitude);
    kv("width", c.perturbation.width);
    kv("center", c.perturbation.center);
    o << "applies_to = " << target_name(c.perturbation.applies_to) << "\n";
    o << "\n[energy]\n";
    kv("rho", c.energy.weights.rho);
    kv("vartheta", c.energy.weights.vartheta);
    kv("zeta", c.energy.weights.zeta);
    kv("omega", c.energy.weights.omega_w);
    kv("fit_lo", c.energy.fit_lo);
    if (c.energy.fit_hi) kv("fit_hi", *c.energy.fit_hi);
    kv("h_window_lo", c.energy.h_window_lo);
    kv("identity_value_scale", c.energy.identity_value_scale);
    if (c.energy.M) kv("M", *c.energy.M);
    o << "\n[output]\n";
    o << "directory = " << c.output_dir << "\n";
    o << "formats = " << (c.write_csv ? "csv" : "") << (c.write_csv && c.write_json ? "," : "")
      << (c.write_json ? "json" : "") << "\n";
    return o.str();
}

}  // namespace beamlab
