#include "diffrestore/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace diffrestore {

namespace {

struct entry {
    std::string key;
    std::vector<std::string> values;
    int line = 0;
    bool consumed = false;
};

struct node {
    std::string key;
    int line = 0;
    std::vector<entry> entries;
    std::vector<node> children;
    bool consumed = false;
};

[[noreturn]] void fail(std::string const& origin, int line, std::string const& what)
{
    throw config_error(origin + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_words(std::string const& line)
{
    std::vector<std::string> words;
    std::istringstream in(line);
    std::string w;
    while (in >> w)
        words.push_back(w);
    return words;
}

node parse_tree(std::string const& text, std::string const& origin)
{
    node root;
    std::vector<node*> stack{ &root };
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto const hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::vector<std::string> words = split_words(raw);
        if (words.empty())
            continue;
        if (words.back() == "{") {
            if (words.size() != 2)
                fail(origin, line_no, "block must be '<name> {'");
            node child;
            child.key = words[0];
            child.line = line_no;
            stack.back()->children.push_back(std::move(child));
            stack.push_back(&stack.back()->children.back());
        } else if (words[0] == "}") {
            if (words.size() != 1)
                fail(origin, line_no, "'}' must stand alone");
            if (stack.size() == 1)
                fail(origin, line_no, "unmatched '}'");
            stack.pop_back();
        } else {
            if (words.size() < 2)
                fail(origin, line_no, "entry '" + words[0] + "' has no value");
            entry e;
            e.key = words[0];
            e.values.assign(words.begin() + 1, words.end());
            e.line = line_no;
            stack.back()->entries.push_back(std::move(e));
        }
    }
    if (stack.size() != 1)
        fail(origin, line_no, "unterminated block '" + stack.back()->key + "'");
    return root;
}

double to_double(std::string const& origin, int line, std::string const& s)
{
    try {
        std::size_t pos = 0;
        double const v = std::stod(s, &pos);
        if (pos != s.size())
            fail(origin, line, "not a number: '" + s + "'");
        return v;
    } catch (config_error&) {
        throw;
    } catch (std::exception&) {
        fail(origin, line, "not a number: '" + s + "'");
    }
}

long long to_int(std::string const& origin, int line, std::string const& s)
{
    long long v = 0;
    auto const [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        fail(origin, line, "not an integer: '" + s + "'");
    return v;
}

// Typed view over a parsed block with consumed-key tracking; any key left
// unconsumed is a schema violation.
class block {
public:
    block(node& n, std::string const& origin) : m_node(&n), m_origin(origin) {}

    entry* find(std::string const& key, bool required)
    {
        entry* found = nullptr;
        for (entry& e : m_node->entries)
            if (e.key == key) {
                if (found)
                    fail(m_origin, e.line, "duplicate key '" + key + "'");
                found = &e;
            }
        if (found)
            found->consumed = true;
        else if (required)
            fail(m_origin, m_node->line, "missing required key '" + key + "' in block '" +
                                             (m_node->key.empty() ? "<top>" : m_node->key) + "'");
        return found;
    }

    std::string get_word(std::string const& key)
    {
        entry* e = find(key, true);
        if (e->values.size() != 1)
            fail(m_origin, e->line, "'" + key + "' expects one value");
        return e->values[0];
    }

    double get_double(std::string const& key, std::optional<double> fallback = {})
    {
        entry* e = find(key, !fallback.has_value());
        if (!e)
            return *fallback;
        if (e->values.size() != 1)
            fail(m_origin, e->line, "'" + key + "' expects one value");
        return to_double(m_origin, e->line, e->values[0]);
    }

    long long get_int(std::string const& key, std::optional<long long> fallback = {})
    {
        entry* e = find(key, !fallback.has_value());
        if (!e)
            return *fallback;
        if (e->values.size() != 1)
            fail(m_origin, e->line, "'" + key + "' expects one value");
        return to_int(m_origin, e->line, e->values[0]);
    }

    std::string get_string(std::string const& key, std::optional<std::string> fallback = {})
    {
        entry* e = find(key, !fallback.has_value());
        if (!e)
            return *fallback;
        if (e->values.size() != 1)
            fail(m_origin, e->line, "'" + key + "' expects one value");
        return e->values[0];
    }

    std::vector<double> get_doubles(std::string const& key, std::size_t count = 0)
    {
        entry* e = find(key, true);
        if (count != 0 && e->values.size() != count)
            fail(m_origin, e->line, "'" + key + "' expects " + std::to_string(count) + " values");
        std::vector<double> out;
        for (std::string const& v : e->values)
            out.push_back(to_double(m_origin, e->line, v));
        return out;
    }

    std::vector<long long> get_ints_opt(std::string const& key)
    {
        entry* e = find(key, false);
        std::vector<long long> out;
        if (e)
            for (std::string const& v : e->values)
                out.push_back(to_int(m_origin, e->line, v));
        return out;
    }

    std::vector<double> get_doubles_opt(std::string const& key)
    {
        entry* e = find(key, false);
        std::vector<double> out;
        if (e)
            for (std::string const& v : e->values)
                out.push_back(to_double(m_origin, e->line, v));
        return out;
    }

    node* child(std::string const& key, bool required)
    {
        node* found = nullptr;
        for (node& c : m_node->children)
            if (c.key == key) {
                if (found)
                    fail(m_origin, c.line, "duplicate block '" + key + "'");
                found = &c;
            }
        if (found)
            found->consumed = true;
        else if (required)
            fail(m_origin, m_node->line, "missing required block '" + key + "'");
        return found;
    }

    std::vector<node*> children(std::string const& key)
    {
        std::vector<node*> out;
        for (node& c : m_node->children)
            if (c.key == key) {
                c.consumed = true;
                out.push_back(&c);
            }
        return out;
    }

    void finish() const
    {
        for (entry const& e : m_node->entries)
            if (!e.consumed)
                fail(m_origin, e.line, "unknown key '" + e.key + "' in block '" +
                                           (m_node->key.empty() ? "<top>" : m_node->key) + "'");
        for (node const& c : m_node->children)
            if (!c.consumed)
                fail(m_origin, c.line, "unknown block '" + c.key + "'");
    }

private:
    node* m_node;
    std::string m_origin;
};

vec3 get_vec3(block& b, std::string const& key)
{
    auto const v = b.get_doubles(key, 3);
    return { v[0], v[1], v[2] };
}

rgb get_rgb(block& b, std::string const& key, std::optional<rgb> fallback)
{
    entry* e = b.find(key, !fallback.has_value());
    if (!e)
        return *fallback;
    auto const v = b.get_doubles(key, 3); // re-find is fine, consumed twice is idempotent
    return rgb{ v[0], v[1], v[2] };
}

target_config parse_target(node& n, std::string const& origin)
{
    block b(n, origin);
    target_config tc;
    tc.kind = b.get_word("kind");
    tc.width = static_cast<int>(b.get_int("width", 32));
    tc.height = static_cast<int>(b.get_int("height", 32));
    if (tc.width < 1 || tc.height < 1)
        fail(origin, n.line, "target: image dimensions must be positive");

    if (tc.kind == "uniform") {
        tc.dim = static_cast<int>(b.get_int("dim", 2));
    } else if (tc.kind == "mixture") {
        tc.dim = static_cast<int>(b.get_int("dim", 2));
        tc.truncation = static_cast<int>(b.get_int("truncation", 5));
        for (node* cn : b.children("component")) {
            block cb(*cn, origin);
            mixture_component mc;
            mc.weight = cb.get_double("weight");
            mc.mean = cb.get_doubles("mean");
            mc.stddev = cb.get_double("stddev");
            cb.finish();
            if (static_cast<int>(mc.mean.size()) != tc.dim)
                fail(origin, cn->line, "component mean must have 'dim' entries");
            if (mc.weight <= 0.0 || mc.stddev <= 0.0)
                fail(origin, cn->line, "component weight and stddev must be > 0");
            tc.components.push_back(std::move(mc));
        }
        if (tc.components.empty())
            fail(origin, n.line, "mixture target needs at least one component");
    } else if (tc.kind == "renderer") {
        tc.sc.width = tc.width;
        tc.sc.height = tc.height;
        tc.sc.max_depth = static_cast<int>(b.get_int("depth", 2));
        if (tc.sc.max_depth < 1)
            fail(origin, n.line, "renderer depth must be >= 1");
        if (node* cam = b.child("camera", true)) {
            block cb(*cam, origin);
            tc.sc.camera.position = get_vec3(cb, "position");
            tc.sc.camera.look_at = get_vec3(cb, "look_at");
            tc.sc.camera.up = { 0, 1, 0 };
            if (cb.find("up", false))
                tc.sc.camera.up = get_vec3(cb, "up");
            tc.sc.camera.fov = cb.get_double("fov");
            cb.finish();
        }
        for (node* qn : b.children("quad")) {
            block qb(*qn, origin);
            quad q;
            q.origin = get_vec3(qb, "origin");
            q.edge_u = get_vec3(qb, "edge_u");
            q.edge_v = get_vec3(qb, "edge_v");
            q.albedo = get_rgb(qb, "albedo", rgb{ 0, 0, 0 });
            q.emission = get_rgb(qb, "emission", rgb{ 0, 0, 0 });
            qb.finish();
            tc.sc.quads.push_back(q);
        }
        for (node* sn : b.children("sphere")) {
            block sb(*sn, origin);
            sphere s;
            s.center = get_vec3(sb, "center");
            s.radius = sb.get_double("radius");
            s.albedo = get_rgb(sb, "albedo", rgb{ 0, 0, 0 });
            s.emission = get_rgb(sb, "emission", rgb{ 0, 0, 0 });
            sb.finish();
            if (s.radius <= 0.0)
                fail(origin, sn->line, "sphere radius must be > 0");
            tc.sc.spheres.push_back(s);
        }
        if (tc.sc.quads.empty() && tc.sc.spheres.empty())
            fail(origin, n.line, "renderer target needs geometry");
        for (quad const& q : tc.sc.quads)
            for (int c = 0; c < 3; ++c)
                if (q.albedo[static_cast<std::size_t>(c)] < 0.0 ||
                    q.albedo[static_cast<std::size_t>(c)] > 1.0 ||
                    q.emission[static_cast<std::size_t>(c)] < 0.0)
                    fail(origin, n.line, "quad albedo must be in [0,1], emission >= 0");
        for (sphere const& s : tc.sc.spheres)
            for (int c = 0; c < 3; ++c)
                if (s.albedo[static_cast<std::size_t>(c)] < 0.0 ||
                    s.albedo[static_cast<std::size_t>(c)] > 1.0 ||
                    s.emission[static_cast<std::size_t>(c)] < 0.0)
                    fail(origin, n.line, "sphere albedo must be in [0,1], emission >= 0");
    } else {
        fail(origin, n.line, "unknown target kind '" + tc.kind + "'");
    }

    if (tc.kind != "renderer" && (tc.dim < 2 || tc.dim % 2 != 0))
        fail(origin, n.line, "target dim must be even and >= 2");
    b.finish();
    return tc;
}

method_config parse_method(node& n, std::string const& origin)
{
    block b(n, origin);
    method_config mc;
    mc.kind = b.get_word("kind");

    bool const langevin_family =
        mc.kind == "mala" || mc.kind == "mala-restore" || mc.kind == "diffusion-restore";
    double const stddev_default = langevin_family ? 5e-3 : 1e-2;
    bool const plain_mh = mc.kind == "metropolis" || mc.kind == "mala";

    mc.stddev = b.get_double("stddev", stddev_default);
    mc.dt = b.get_double("dt", 1e-5);
    mc.m = b.get_double("m", 64.0);
    mc.large_step_prob = b.get_double("large_step_prob", plain_mh ? 0.3 : 0.0);
    mc.c_tilde = b.get_double("c_tilde", 0.5 * mc.stddev * mc.stddev);
    mc.kappa0 = b.get_double("kappa0", 0.0);
    mc.p_lambda = b.get_double("p_lambda", 0.0);
    b.finish();

    static std::set<std::string> const kinds{ "pt", "metropolis", "mala", "metropolis-restore",
                                              "mala-restore", "diffusion-restore" };
    if (!kinds.count(mc.kind))
        fail(origin, n.line, "unknown method kind '" + mc.kind + "'");
    if (mc.stddev <= 0.0)
        fail(origin, n.line, "stddev must be > 0");
    if (mc.dt <= 0.0)
        fail(origin, n.line, "dt must be > 0");
    if (mc.m < 1.0)
        fail(origin, n.line, "m must be >= 1");
    if (mc.large_step_prob < 0.0 || mc.large_step_prob > 1.0)
        fail(origin, n.line, "large_step_prob must be in [0,1]");
    if (mc.c_tilde < 0.0)
        fail(origin, n.line, "c_tilde must be >= 0");
    return mc;
}

run_config parse_run(node& n, std::string const& origin)
{
    block b(n, origin);
    run_config rc;
    rc.budget = b.get_int("budget", 1000000);
    rc.seed = static_cast<std::uint64_t>(b.get_int("seed", 0));
    rc.threads = static_cast<int>(b.get_int("threads", 0));
    rc.dispatch_count = static_cast<int>(b.get_int("dispatch_count", 0));
    rc.exposure = b.get_double("exposure", 1.0);
    rc.out = b.get_string("out", "out");
    rc.budgets = b.get_ints_opt("budgets");
    for (long long s : b.get_ints_opt("seeds"))
        rc.seeds.push_back(static_cast<std::uint64_t>(s));
    rc.reference_spp = static_cast<int>(b.get_int("reference_spp", 16384));
    rc.quadrature = static_cast<int>(b.get_int("quadrature", 256));
    b.finish();
    if (rc.budget <= 0)
        fail(origin, n.line, "budget must be > 0");
    for (std::size_t i = 1; i < rc.budgets.size(); ++i)
        if (rc.budgets[i] <= rc.budgets[i - 1])
            fail(origin, n.line, "budgets must be strictly ascending");
    return rc;
}

bias_config parse_bias(node& n, std::string const& origin)
{
    block b(n, origin);
    bias_config bc;
    bc.sigma = b.get_double("sigma", 1.0);
    bc.c = b.get_double("c", 1.0);
    bc.dt_sweep = b.get_doubles_opt("dt_sweep");
    bc.grid = static_cast<int>(b.get_int("grid", 64));
    bc.quadrature = static_cast<int>(b.get_int("quadrature", 64));
    b.finish();
    if (bc.dt_sweep.empty())
        fail(origin, n.line, "bias block requires 'dt_sweep' with at least one value");
    for (double dt : bc.dt_sweep)
        if (dt <= 0.0)
            fail(origin, n.line, "dt_sweep values must be > 0");
    if (bc.sigma <= 0.0)
        fail(origin, n.line, "sigma must be > 0");
    return bc;
}

} // namespace

experiment_config parse_config_text(std::string const& text, std::string const& origin)
{
    node root = parse_tree(text, origin);
    block top(root, origin);

    long long const schema = top.get_int("schema");
    if (schema != kConfigSchema)
        throw config_error(origin + ": schema " + std::to_string(schema) +
                           " not supported (expected " + std::to_string(kConfigSchema) + ")");

    experiment_config cfg;
    if (node* tn = top.child("target", true))
        cfg.target = parse_target(*tn, origin);
    for (node* mn : top.children("method"))
        cfg.methods.push_back(parse_method(*mn, origin));
    if (cfg.methods.empty())
        throw config_error(origin + ": at least one method block is required");
    if (node* rn = top.child("run", false))
        cfg.run = parse_run(*rn, origin);
    if (node* bn = top.child("bias", false))
        cfg.bias = parse_bias(*bn, origin);
    top.finish();
    return cfg;
}

experiment_config parse_config_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::unique_ptr<target_density> make_target(target_config const& tc)
{
    if (tc.kind == "uniform")
        return std::make_unique<uniform_target>(tc.dim, tc.width, tc.height);
    if (tc.kind == "mixture")
        return std::make_unique<wrapped_gaussian_mixture>(tc.components, tc.width, tc.height,
                                                          tc.truncation);
    if (tc.kind == "renderer")
        return std::make_unique<renderer_target>(tc.sc);
    throw config_error("make_target: unknown kind '" + tc.kind + "'");
}

std::pair<image, run_stats> run_method(method_config const& mc, target_density const& t,
                                       run_options opt, int dispatch_count)
{
    if (mc.kind == "pt") {
        auto result = run_path_tracing(t, opt);
        return result;
    }
    if (mc.kind == "metropolis" || mc.kind == "mala") {
        metropolis_config mcfg{ mc.stddev, mc.large_step_prob };
        mala_config lcfg{ mc.stddev, mc.large_step_prob };
        return run_plain_mcmc(mc.kind == "metropolis" ? plain_mcmc_kind::metropolis
                                                      : plain_mcmc_kind::mala,
                              mcfg, lcfg, t, opt);
    }

    restore_config rc;
    rc.m = mc.m;
    rc.kappa0 = mc.kappa0;
    rc.dt = mc.dt;
    rc.p_lambda = mc.p_lambda;
    rc.dispatch_count = dispatch_count;
    if (mc.kind == "diffusion-restore") {
        rc.holding = holding_mode::embedded;
        langevin_dynamics dyn(langevin_config{ mc.stddev, mc.c_tilde, mc.dt });
        return run_restore(rc, dyn, t, opt);
    }
    rc.holding = holding_mode::unit;
    if (mc.kind == "metropolis-restore") {
        metropolis_dynamics dyn(metropolis_config{ mc.stddev, mc.large_step_prob });
        auto result = run_restore(rc, dyn, t, opt);
        result.second.method = "metropolis-restore";
        return result;
    }
    if (mc.kind == "mala-restore") {
        mala_dynamics dyn(mala_config{ mc.stddev, mc.large_step_prob });
        auto result = run_restore(rc, dyn, t, opt);
        result.second.method = "mala-restore";
        return result;
    }
    throw config_error("run_method: unknown kind '" + mc.kind + "'");
}

} // namespace diffrestore
