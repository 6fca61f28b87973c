#include "rdbounds/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rdbounds/errors.hpp"
#include "toml.hpp"

namespace rdbounds {

namespace {

struct PresetText {
    const char* name;
    const char* text;
};

constexpr PresetText kPresets[] = {
#include "presets.inc"
};

BoundaryKind parse_kind(const std::string& s) {
    if (s == "dirichlet") return BoundaryKind::Dirichlet;
    if (s == "robin") return BoundaryKind::Robin;
    throw InputError("boundary kind must be dirichlet or robin, got '" + s + "'");
}

const char* kind_name(BoundaryKind k) { return k == BoundaryKind::Dirichlet ? "dirichlet" : "robin"; }

PenaltyMode parse_penalty(const std::string& s) {
    if (s == "a-weighted") return PenaltyMode::AWeighted;
    if (s == "plain") return PenaltyMode::Plain;
    throw InputError("penalty must be a-weighted or plain, got '" + s + "'");
}

class Reader {
public:
    explicit Reader(const toml::table& root) : root_(root) {}

    const toml::node* find(const char* section, const char* key) const {
        const toml::node* n = section ? root_.get(section) : &root_;
        if (!n) return nullptr;
        const toml::table* t = n->as_table();
        if (!t) throw InputError(std::string("[") + section + "] must be a table");
        return t->get(key);
    }

    static std::string path(const char* section, const char* key) {
        return section ? std::string(section) + "." + key : std::string(key);
    }

    void get(const char* section, const char* key, std::string& out) const {
        if (const toml::node* n = find(section, key)) {
            auto v = n->value<std::string>();
            if (!v) throw InputError(path(section, key) + " must be a string");
            out = *v;
        }
    }
    void get(const char* section, const char* key, double& out) const {
        if (const toml::node* n = find(section, key)) {
            auto v = n->value<double>();
            if (!v) throw InputError(path(section, key) + " must be a number");
            out = *v;
        }
    }
    void get(const char* section, const char* key, std::optional<double>& out) const {
        if (find(section, key)) {
            double v = 0.0;
            get(section, key, v);
            out = v;
        }
    }
    void get(const char* section, const char* key, std::size_t& out) const {
        if (const toml::node* n = find(section, key)) {
            auto v = n->value<int64_t>();
            if (!v || *v < 0) throw InputError(path(section, key) + " must be a nonnegative integer");
            out = static_cast<std::size_t>(*v);
        }
    }
    void get(const char* section, const char* key, bool& out) const {
        if (const toml::node* n = find(section, key)) {
            auto v = n->value<bool>();
            if (!v) throw InputError(path(section, key) + " must be a boolean");
            out = *v;
        }
    }
    template <class T>
    void get_list(const char* section, const char* key, std::vector<T>& out) const {
        const toml::node* n = find(section, key);
        if (!n) return;
        const toml::array* a = n->as_array();
        if (!a) throw InputError(path(section, key) + " must be an array");
        out.clear();
        for (const auto& item : *a) {
            auto v = item.value<T>();
            if (!v) throw InputError(path(section, key) + " has an element of the wrong type");
            out.push_back(*v);
        }
    }

private:
    const toml::table& root_;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    std::string s = os.str();
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

TimeScheme parse_scheme(const std::string& s) {
    if (s == "backward-euler") return TimeScheme::BackwardEuler;
    if (s == "crank-nicolson") return TimeScheme::CrankNicolson;
    throw InputError("scheme must be backward-euler or crank-nicolson, got '" + s + "'");
}

const char* scheme_name(TimeScheme s) {
    return s == TimeScheme::BackwardEuler ? "backward-euler" : "crank-nicolson";
}

CaseConfig parse_config(std::string_view text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error at line " << e.source().begin.line << ": " << e.description();
        throw InputError(os.str());
    }
    const Reader r(root);
    CaseConfig c;
    r.get(nullptr, "name", c.name);
    r.get("domain", "length", c.length);
    r.get("domain", "horizon", c.horizon);
    std::string left = kind_name(c.left), right = kind_name(c.right);
    r.get("domain", "left", left);
    r.get("domain", "right", right);
    c.left = parse_kind(left);
    c.right = parse_kind(right);

    r.get("coefficients", "A", c.A);
    r.get("coefficients", "lambda", c.lambda);
    r.get("coefficients", "nu1", c.nu1);
    r.get("coefficients", "nu2", c.nu2);
    r.get("coefficients", "sigma_left", c.sigma_left);
    r.get("coefficients", "sigma_right", c.sigma_right);

    if (r.find("exact", "u")) {
        std::string u;
        r.get("exact", "u", u);
        c.exact_u = u;
    }
    r.get("data", "f", c.f);
    r.get("data", "phi", c.phi);
    r.get("data", "g_left", c.g_left);
    r.get("data", "g_right", c.g_right);

    r.get("mesh", "nx", c.nx);
    r.get("mesh", "nt", c.nt);
    std::string scheme = scheme_name(c.scheme);
    r.get("mesh", "scheme", scheme);
    c.scheme = parse_scheme(scheme);
    r.get("mesh", "quadrature_order", c.quadrature_order);
    r.get("mesh", "test_refinement", c.test_refinement);

    r.get_list("estimate", "estimators", c.estimators);
    r.get("estimate", "optimize", c.optimize);
    r.get("estimate", "delta", c.params.delta);
    r.get("estimate", "gamma", c.params.gamma);
    r.get("estimate", "epsilon", c.params.epsilon);
    r.get("estimate", "rho1", c.params.rho1);
    r.get("estimate", "rho2", c.params.rho2);
    r.get_list("estimate", "breaks", c.breaks);
    std::string penalty = penalty_name(c.penalty);
    r.get("estimate", "penalty", penalty);
    c.penalty = parse_penalty(penalty);
    r.get("estimate", "w", c.w_policy);
    r.get("estimate", "beta", c.beta);
    r.get("estimate", "safety", c.safety);
    r.get("estimate", "seed", c.seed);
    r.get("output", "dir", c.output_dir);

    if (c.nx == 0 || c.nt == 0) throw InputError("mesh.nx and mesh.nt must be positive");
    if (c.quadrature_order == 0) throw InputError("mesh.quadrature_order must be positive");
    if (c.w_policy != "zero" && c.w_policy != "coarse") throw InputError("estimate.w must be zero or coarse");
    static const char* known[] = {"thm1", "thm2", "thm3", "thm4", "thm5", "thm6", "minorant", "combined"};
    for (const auto& e : c.estimators)
        if (std::find(std::begin(known), std::end(known), e) == std::end(known))
            throw InputError("unknown estimator '" + e + "'");
    if (!(c.safety >= 1.0)) throw InputError("estimate.safety must be >= 1");
    if (!(c.beta > 0.0)) throw InputError("estimate.beta must be positive");
    return c;
}

CaseConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_toml(const CaseConfig& c) {
    std::ostringstream os;
    os << "name = " << quote(c.name) << "\n\n[domain]\n"
       << "length = " << number(c.length) << "\nhorizon = " << number(c.horizon) << "\nleft = " << quote(kind_name(c.left))
       << "\nright = " << quote(kind_name(c.right)) << "\n\n[coefficients]\nA = " << quote(c.A)
       << "\nlambda = " << quote(c.lambda) << "\n";
    if (c.nu1) os << "nu1 = " << number(*c.nu1) << "\n";
    if (c.nu2) os << "nu2 = " << number(*c.nu2) << "\n";
    os << "sigma_left = " << quote(c.sigma_left) << "\nsigma_right = " << quote(c.sigma_right) << "\n";
    if (c.exact_u) {
        os << "\n[exact]\nu = " << quote(*c.exact_u) << "\n";
    } else {
        os << "\n[data]\nf = " << quote(c.f) << "\nphi = " << quote(c.phi) << "\ng_left = " << quote(c.g_left)
           << "\ng_right = " << quote(c.g_right) << "\n";
    }
    os << "\n[mesh]\nnx = " << c.nx << "\nnt = " << c.nt << "\nscheme = " << quote(scheme_name(c.scheme))
       << "\nquadrature_order = " << c.quadrature_order << "\ntest_refinement = " << c.test_refinement
       << "\n\n[estimate]\nestimators = [";
    for (std::size_t i = 0; i < c.estimators.size(); ++i) os << (i ? ", " : "") << quote(c.estimators[i]);
    os << "]\noptimize = " << (c.optimize ? "true" : "false") << "\ndelta = " << number(c.params.delta)
       << "\ngamma = " << number(c.params.gamma) << "\nepsilon = " << number(c.params.epsilon)
       << "\nrho1 = " << number(c.params.rho1) << "\nrho2 = " << number(c.params.rho2) << "\nbreaks = [";
    for (std::size_t i = 0; i < c.breaks.size(); ++i) os << (i ? ", " : "") << number(c.breaks[i]);
    os << "]\npenalty = " << quote(penalty_name(c.penalty)) << "\nw = " << quote(c.w_policy)
       << "\nbeta = " << number(c.beta) << "\nsafety = " << number(c.safety) << "\nseed = " << c.seed
       << "\n\n[output]\ndir = " << quote(c.output_dir) << "\n";
    return os.str();
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.emplace_back(p.name);
    return out;
}

CaseConfig preset(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return parse_config(p.text);
    throw InputError("unknown preset '" + name + "'");
}

CaseConfig resolve_config(const std::string& name_or_path) {
    for (const auto& p : kPresets)
        if (name_or_path == p.name) return parse_config(p.text);
    return load_config(name_or_path);
}

ProblemCase build_problem(const CaseConfig& c) {
    const Domain domain(c.length, c.horizon, c.left, c.right);
    const ScalarExpr A = parse_expr(c.A);
    double nu1 = 0.0, nu2 = 0.0;
    if (c.nu1 && c.nu2) {
        nu1 = *c.nu1;
        nu2 = *c.nu2;
    } else {
        const auto b = sampled_bounds(A, domain, 257);
        nu1 = c.nu1.value_or(b[0]);
        nu2 = c.nu2.value_or(b[1]);
    }
    const ScalarExpr lambda = parse_expr(c.lambda);
    if (c.exact_u) {
        ProblemCase pc = manufacture(parse_expr(*c.exact_u), A, lambda,
                                     {parse_expr(c.sigma_left), parse_expr(c.sigma_right)}, domain, nu1, nu2);
        pc.validate();
        return pc;
    }
    std::array<RobinData, 2> robin{RobinData{parse_expr(c.sigma_left), parse_expr(c.g_left)},
                                   RobinData{parse_expr(c.sigma_right), parse_expr(c.g_right)}};
    ProblemCase pc(domain, A, nu1, nu2, lambda, parse_expr(c.f), parse_expr(c.phi), robin);
    pc.validate();
    return pc;
}

SpaceTimeMesh build_case_mesh(const CaseConfig& c, const ProblemCase& problem) {
    const SpaceTimeMesh base = align_mesh(problem, build_mesh(problem.domain(), c.nx, c.nt));
    return base.with_nodes(c.breaks, {});
}

}  // namespace rdbounds
