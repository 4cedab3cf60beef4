#include "h221/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace h221 {

namespace {

using nlohmann::json;

// input iterator that tracks the line of the last non-blank character consumed by the parser
struct CountingIterator {
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* p = nullptr;
    int* line = nullptr;
    int* last_line = nullptr;

    reference operator*() const { return *p; }
    CountingIterator& operator++() {
        if (*p == '\n')
            ++*line;
        else if (*p != ' ' && *p != '\t' && *p != '\r')
            *last_line = *line;
        ++p;
        return *this;
    }
    CountingIterator operator++(int) {
        CountingIterator t = *this;
        ++*this;
        return t;
    }
    bool operator==(const CountingIterator& o) const { return p == o.p; }
    bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

std::string escape_token(const std::string& k) {
    std::string out;
    for (char c : k) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

struct Locator : json::json_sax_t {
    struct Frame {
        bool array = false;
        int index = 0;
        std::string base, key;
    };
    std::map<std::string, int> lines;
    std::vector<Frame> stack;
    const int* last_line = nullptr;

    std::string value_pointer() {
        if (stack.empty()) return "";
        Frame& f = stack.back();
        if (f.array) return f.base + "/" + std::to_string(f.index++);
        return f.base + "/" + f.key;
    }
    bool value() {
        lines.emplace(value_pointer(), *last_line);
        return true;
    }
    bool open(bool array) {
        const std::string ptr = value_pointer();
        lines.emplace(ptr, *last_line);
        stack.push_back(Frame{array, 0, ptr, {}});
        return true;
    }

    bool null() override { return value(); }
    bool boolean(bool) override { return value(); }
    bool number_integer(number_integer_t) override { return value(); }
    bool number_unsigned(number_unsigned_t) override { return value(); }
    bool number_float(number_float_t, const string_t&) override { return value(); }
    bool string(string_t&) override { return value(); }
    bool binary(binary_t&) override { return value(); }
    bool start_object(std::size_t) override { return open(false); }
    bool key(string_t& k) override {
        stack.back().key = escape_token(k);
        lines.emplace(stack.back().base + "/" + stack.back().key, *last_line);
        return true;
    }
    bool end_object() override {
        stack.pop_back();
        return true;
    }
    bool start_array(std::size_t) override { return open(true); }
    bool end_array() override {
        stack.pop_back();
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }
};

class Reader {
public:
    Reader(const json& root, std::map<std::string, int> lines, std::string source)
        : root_(root), lines_(std::move(lines)), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        std::string p = ptr;
        while (true) {
            auto it = lines_.find(p);
            if (it != lines_.end())
                throw ConfigError(source_ + ":" + std::to_string(it->second) + ": " + disp(ptr) + ": " + msg);
            if (p.empty()) break;
            p = p.substr(0, p.rfind('/'));
        }
        throw ConfigError(source_ + ": " + disp(ptr) + ": " + msg);
    }

    bool has(const std::string& ptr) const { return root_.contains(json::json_pointer(ptr)); }
    const json& at(const std::string& ptr) const {
        if (!has(ptr)) fail(ptr, "missing required field");
        return root_.at(json::json_pointer(ptr));
    }

    void only_keys(const std::string& ptr, const std::set<std::string>& allowed) const {
        const json& obj = ptr.empty() ? root_ : at(ptr);
        if (!obj.is_object()) fail(ptr, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) fail(ptr + "/" + escape_token(it.key()), "unknown field");
    }

    cplx get_cplx(const std::string& ptr) const {
        const json& v = at(ptr);
        try {
            return cplx_from_json(v);
        } catch (const std::exception&) {
            fail(ptr, "expected a number or a [re, im] pair");
        }
    }
    double get_double(const std::string& ptr) const {
        const json& v = at(ptr);
        if (!v.is_number()) fail(ptr, "expected a number");
        return v.get<double>();
    }
    int get_int(const std::string& ptr) const {
        const json& v = at(ptr);
        if (!v.is_number_integer()) fail(ptr, "expected an integer");
        return v.get<int>();
    }
    std::vector<double> get_doubles(const std::string& ptr) const {
        const json& v = at(ptr);
        if (!v.is_array()) fail(ptr, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(get_double(ptr + "/" + std::to_string(k)));
        return out;
    }
    std::vector<cplx> get_cplxs(const std::string& ptr) const {
        const json& v = at(ptr);
        if (!v.is_array()) fail(ptr, "expected an array of complex values");
        std::vector<cplx> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(get_cplx(ptr + "/" + std::to_string(k)));
        return out;
    }

    template <class T, class F>
    void optional(const std::string& ptr, T& target, F getter) const {
        if (has(ptr)) target = (this->*getter)(ptr);
    }

private:
    static std::string disp(const std::string& ptr) { return ptr.empty() ? "/" : ptr; }

    const json& root_;
    std::map<std::string, int> lines_;
    std::string source_;
};

TimeGrid read_grid(const Reader& r, const std::string& ptr, const TimePoint& origin, TimeGrid fallback) {
    TimeGrid g = fallback;
    g.origin = origin;
    if (!r.has(ptr)) return g;
    r.only_keys(ptr, {"n1", "n2", "d1", "d2"});
    r.optional(ptr + "/n1", g.n1, &Reader::get_int);
    r.optional(ptr + "/n2", g.n2, &Reader::get_int);
    r.optional(ptr + "/d1", g.d1, &Reader::get_cplx);
    r.optional(ptr + "/d2", g.d2, &Reader::get_cplx);
    if (g.n1 < 1 || g.n2 < 1) r.fail(ptr, "grid needs at least one node per direction");
    return g;
}

SpectralLine read_line(const Reader& r, const std::string& ptr, SpectralLine fallback) {
    SpectralLine s = fallback;
    if (!r.has(ptr)) return s;
    r.only_keys(ptr, {"start", "end", "count"});
    r.optional(ptr + "/start", s.start, &Reader::get_cplx);
    r.optional(ptr + "/end", s.end, &Reader::get_cplx);
    r.optional(ptr + "/count", s.count, &Reader::get_int);
    if (s.count < 1) r.fail(ptr + "/count", "count must be positive");
    return s;
}

void check_steps(const Reader& r, const std::string& ptr, const std::vector<double>& steps, double tol) {
    if (steps.size() < 3) r.fail(ptr, "at least three step sizes are needed for an order fit");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (!(steps[k] > 0)) r.fail(ptr, "step sizes must be positive");
        if (k > 0 && !(steps[k] < steps[k - 1])) r.fail(ptr, "step sizes must decrease");
    }
    if (!(tol < 0.1 * steps.back() * steps.back()))
        r.fail(ptr, "integrator tolerance must stay below 0.1 h_min^2 for the finite differences to resolve it");
}

const char* demo_text = R"({
  "params": {
    "kappa0": [2.5, 0.1],
    "kappa1": [3.0, -0.05],
    "gamma1": [0.7, 0.05],
    "gamma2": [0.4, 0.02],
    "theta1": [0.3, 0.1]
  },
  "initial_state": {
    "Q1": [0.3, 0.05],
    "Q2": [0.5, -0.1],
    "P1": [0.2, 0.03],
    "P2": [0.8, 0.05],
    "u": [1.0, 0.1]
  },
  "rational_state": {
    "lambda1": [2.3, 0.2],
    "lambda2": [-0.7, 0.3],
    "mu1": [0.4, 0.1],
    "mu2": [-0.3, 0.2]
  },
  "base_time": {"chart": "tau", "c1": [1.0, 0.0], "c2": [0.5, 0.0]},
  "time_grid": {"n1": 5, "n2": 5, "d1": [0.075, 0.0], "d2": [0.075, 0.0]},
  "tolerances": {"integrator": 1e-11, "flow": 1e-10, "clearance": 0.05, "path": 1e-8},
  "flow": {
    "dt1": [0.1, 0.0],
    "dt2": [0.1, 0.0],
    "tol_sweep": [1e-8, 1e-9, 1e-10],
    "random_states": 10,
    "random_radius": 0.3,
    "seed": 20261016,
    "samples_per_segment": 8
  },
  "lax": {
    "eta": [[2.0, 0.2], [-0.7, 0.5], [0.4, -0.6]],
    "steps": [1e-3, 5e-4, 2.5e-4]
  },
  "prlg": {
    "grid": {"n1": 20, "n2": 20, "d1": [0.015789473684210527, 0.0], "d2": [0.015789473684210527, 0.0]},
    "steps": [1e-3, 5e-4, 2.5e-4]
  },
  "psi": {
    "x": {"start": [2.8, 0.2], "end": [3.8, 0.2], "count": 8},
    "y": {"start": [1.4, 0.2], "end": [2.4, 0.2], "count": 8},
    "base_eta": [2.0, 0.2],
    "steps": [4e-3, 2e-3, 1e-3]
  },
  "output_dir": "out"
}
)";

}  // namespace

std::vector<cplx> SpectralLine::values() const {
    std::vector<cplx> out;
    for (int k = 0; k < count; ++k)
        out.push_back(count == 1 ? start : start + (end - start) * (double(k) / (count - 1)));
    return out;
}

std::map<std::string, int> locate_lines(const std::string& text) {
    int line = 1, last_line = 1;
    Locator loc;
    loc.last_line = &last_line;
    CountingIterator first{text.data(), &line, &last_line};
    CountingIterator last{text.data() + text.size(), &line, &last_line};
    json::sax_parse(first, last, &loc, nlohmann::detail::input_format_t::json, false);
    return loc.lines;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(source + ":" + std::to_string(line) + ": " + e.what());
    }
    const Reader r(root, locate_lines(text), source);
    if (!root.is_object()) r.fail("", "expected a JSON object");
    r.only_keys("", {"params", "initial_state", "rational_state", "base_time", "time_grid", "tolerances", "flow", "lax",
                     "prlg", "psi", "output_dir"});

    RunConfig cfg;
    cfg.source = source;
    cfg.raw = text;

    r.only_keys("/params", {"kappa0", "kappa1", "gamma1", "gamma2", "theta1"});
    cfg.params =
        make_parameter_set(r.get_cplx("/params/kappa0"), r.get_cplx("/params/kappa1"), r.get_cplx("/params/gamma1"),
                           r.get_cplx("/params/gamma2"), r.get_cplx("/params/theta1"));

    r.only_keys("/initial_state", {"Q1", "Q2", "P1", "P2", "u"});
    cfg.initial_state = {r.get_cplx("/initial_state/Q1"), r.get_cplx("/initial_state/Q2"),
                         r.get_cplx("/initial_state/P1"), r.get_cplx("/initial_state/P2"),
                         r.get_cplx("/initial_state/u")};
    if (std::abs(cfg.initial_state.u) < cfg.clearance) r.fail("/initial_state/u", "gauge scalar u must be nonzero");

    if (r.has("/rational_state")) {
        r.only_keys("/rational_state", {"lambda1", "lambda2", "mu1", "mu2"});
        cfg.rational_state = {r.get_cplx("/rational_state/lambda1"), r.get_cplx("/rational_state/lambda2"),
                              r.get_cplx("/rational_state/mu1"), r.get_cplx("/rational_state/mu2")};
    } else {
        cfg.rational_state = {{2.3, 0.2}, {-0.7, 0.3}, {0.4, 0.1}, {-0.3, 0.2}};
    }

    if (r.has("/base_time")) {
        r.only_keys("/base_time", {"chart", "c1", "c2"});
        const json& chart = r.at("/base_time/chart");
        if (!chart.is_string() || (chart != "t" && chart != "tau"))
            r.fail("/base_time/chart", "chart must be \"t\" or \"tau\"");
        const TimePoint t{chart == "t" ? Chart::T : Chart::TAU, r.get_cplx("/base_time/c1"),
                          r.get_cplx("/base_time/c2")};
        if (std::abs(t.c1) < cfg.clearance || std::abs(t.c2) < cfg.clearance)
            r.fail("/base_time", "base time lies within clearance of zero");
        cfg.base_time = t.to_tau();
    }

    if (r.has("/tolerances")) {
        r.only_keys("/tolerances", {"integrator", "flow", "clearance", "path"});
        r.optional("/tolerances/integrator", cfg.integrator_tol, &Reader::get_double);
        r.optional("/tolerances/flow", cfg.flow_tol, &Reader::get_double);
        r.optional("/tolerances/clearance", cfg.clearance, &Reader::get_double);
        r.optional("/tolerances/path", cfg.path_tol, &Reader::get_double);
        for (const char* k : {"integrator", "flow", "clearance", "path"})
            if (r.has(std::string("/tolerances/") + k) && !(r.get_double(std::string("/tolerances/") + k) > 0))
                r.fail(std::string("/tolerances/") + k, "must be positive");
    }

    TimeGrid demo_grid;
    demo_grid.n1 = demo_grid.n2 = 5;
    demo_grid.d1 = demo_grid.d2 = 0.075;
    cfg.time_grid = read_grid(r, "/time_grid", cfg.base_time, demo_grid);

    if (r.has("/flow")) {
        r.only_keys("/flow",
                    {"dt1", "dt2", "tol_sweep", "random_states", "random_radius", "seed", "samples_per_segment"});
        FlowConfig& f = cfg.flow;
        r.optional("/flow/dt1", f.dt1, &Reader::get_cplx);
        r.optional("/flow/dt2", f.dt2, &Reader::get_cplx);
        r.optional("/flow/tol_sweep", f.tol_sweep, &Reader::get_doubles);
        r.optional("/flow/random_states", f.random_states, &Reader::get_int);
        r.optional("/flow/random_radius", f.random_radius, &Reader::get_double);
        r.optional("/flow/samples_per_segment", f.samples_per_segment, &Reader::get_int);
        if (r.has("/flow/seed")) {
            const json& s = r.at("/flow/seed");
            if (!s.is_number_unsigned()) r.fail("/flow/seed", "expected a non-negative integer");
            f.seed = s.get<unsigned long long>();
        }
        if (f.random_states < 0) r.fail("/flow/random_states", "must be non-negative");
        if (f.samples_per_segment < 0) r.fail("/flow/samples_per_segment", "must be non-negative");
        if (f.tol_sweep.size() < 2) r.fail("/flow/tol_sweep", "at least two tolerances are needed");
        for (std::size_t k = 0; k < f.tol_sweep.size(); ++k)
            if (!(f.tol_sweep[k] > 0) || (k > 0 && !(f.tol_sweep[k] < f.tol_sweep[k - 1])))
                r.fail("/flow/tol_sweep", "tolerances must be positive and decreasing");
    }

    cfg.lax.eta = {{2.0, 0.2}, {-0.7, 0.5}, {0.4, -0.6}};
    if (r.has("/lax")) {
        r.only_keys("/lax", {"eta", "steps"});
        r.optional("/lax/eta", cfg.lax.eta, &Reader::get_cplxs);
        r.optional("/lax/steps", cfg.lax.steps, &Reader::get_doubles);
        for (std::size_t k = 0; k < cfg.lax.eta.size(); ++k) {
            const cplx e = cfg.lax.eta[k];
            if (std::abs(e) < cfg.clearance || std::abs(e - 1.0) < cfg.clearance)
                r.fail("/lax/eta/" + std::to_string(k), "spectral point within clearance of a pole");
        }
    }
    check_steps(r, r.has("/lax/steps") ? "/lax/steps" : "", cfg.lax.steps, cfg.integrator_tol);

    TimeGrid prlg_grid;
    prlg_grid.n1 = prlg_grid.n2 = 20;
    prlg_grid.d1 = prlg_grid.d2 = 0.3 / 19;
    cfg.prlg.grid = prlg_grid;
    cfg.prlg.grid.origin = cfg.base_time;
    if (r.has("/prlg")) {
        r.only_keys("/prlg", {"grid", "steps"});
        cfg.prlg.grid = read_grid(r, "/prlg/grid", cfg.base_time, prlg_grid);
        r.optional("/prlg/steps", cfg.prlg.steps, &Reader::get_doubles);
    }
    check_steps(r, r.has("/prlg/steps") ? "/prlg/steps" : "", cfg.prlg.steps, cfg.integrator_tol);

    cfg.psi.x = {{2.8, 0.2}, {3.8, 0.2}, 8};
    cfg.psi.y = {{1.4, 0.2}, {2.4, 0.2}, 8};
    if (r.has("/psi")) {
        r.only_keys("/psi", {"x", "y", "base_eta", "steps"});
        cfg.psi.x = read_line(r, "/psi/x", cfg.psi.x);
        cfg.psi.y = read_line(r, "/psi/y", cfg.psi.y);
        r.optional("/psi/base_eta", cfg.psi.base_eta, &Reader::get_cplx);
        r.optional("/psi/steps", cfg.psi.steps, &Reader::get_doubles);
    }
    check_steps(r, r.has("/psi/steps") ? "/psi/steps" : "", cfg.psi.steps, cfg.integrator_tol);

    if (r.has("/output_dir")) {
        const json& o = r.at("/output_dir");
        if (!o.is_string()) r.fail("/output_dir", "expected a string");
        cfg.output_dir = o.get<std::string>();
    }

    for (const auto& [ptr, grid] : {std::pair<std::string, const TimeGrid*>{"/time_grid", &cfg.time_grid},
                                    std::pair<std::string, const TimeGrid*>{"/prlg/grid", &cfg.prlg.grid}}) {
        for (int i = 0; i < grid->n1; ++i)
            for (int j = 0; j < grid->n2; ++j) {
                const TimePoint t = grid->node(i, j);
                if (std::abs(t.c1) < cfg.clearance || std::abs(t.c2) < cfg.clearance)
                    r.fail(ptr, "grid node within clearance of a zero time");
            }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

const std::string& demo_config_text() {
    static const std::string text = demo_text;
    return text;
}

RunConfig demo_config() { return parse_config(demo_config_text(), "<builtin demo>"); }

}  // namespace h221
