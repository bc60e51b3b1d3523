#include "diffrestore/microrender.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "diffrestore/rng.hpp"

namespace diffrestore {

vec3 normalize(vec3 v)
{
    double const len = std::sqrt(dot(v, v));
    return len > 0.0 ? (1.0 / len) * v : v;
}

namespace {

constexpr double kRayEpsilon = 1e-9;
constexpr double kHitOffset = 1e-6;

struct hit_record {
    double t = -1.0;
    vec3 point;
    vec3 normal;
    rgb albedo{ 0, 0, 0 };
    rgb emission{ 0, 0, 0 };
};

bool intersect_quad(quad const& q, vec3 const& org, vec3 const& dir, double t_max, hit_record& rec)
{
    vec3 const n = cross(q.edge_u, q.edge_v);
    double const denom = dot(n, dir);
    if (std::abs(denom) < kRayEpsilon)
        return false;
    double const t = dot(n, q.origin - org) / denom;
    if (t < kHitOffset || t >= t_max)
        return false;
    vec3 const p = org + t * dir;
    vec3 const d = p - q.origin;
    double const uu = dot(q.edge_u, q.edge_u), vv = dot(q.edge_v, q.edge_v);
    double const uv = dot(q.edge_u, q.edge_v);
    double const du = dot(d, q.edge_u), dv = dot(d, q.edge_v);
    double const det = uu * vv - uv * uv;
    if (std::abs(det) < kRayEpsilon)
        return false;
    double const a = (du * vv - dv * uv) / det;
    double const b = (dv * uu - du * uv) / det;
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
        return false;
    rec.t = t;
    rec.point = p;
    rec.normal = normalize(n);
    rec.albedo = q.albedo;
    rec.emission = q.emission;
    return true;
}

bool intersect_sphere(sphere const& s, vec3 const& org, vec3 const& dir, double t_max,
                      hit_record& rec)
{
    vec3 const oc = org - s.center;
    double const b = dot(oc, dir);
    double const c = dot(oc, oc) - s.radius * s.radius;
    double const disc = b * b - c;
    if (disc < 0.0)
        return false;
    double const sq = std::sqrt(disc);
    double t = -b - sq;
    if (t < kHitOffset) {
        t = -b + sq;
        if (t < kHitOffset)
            return false;
    }
    if (t >= t_max)
        return false;
    rec.t = t;
    rec.point = org + t * dir;
    rec.normal = normalize(rec.point - s.center);
    rec.albedo = s.albedo;
    rec.emission = s.emission;
    return true;
}

bool intersect_scene(scene const& sc, vec3 const& org, vec3 const& dir, hit_record& rec)
{
    double t_max = 1e30;
    bool found = false;
    hit_record tmp;
    for (quad const& q : sc.quads)
        if (intersect_quad(q, org, dir, t_max, tmp)) {
            rec = tmp;
            t_max = tmp.t;
            found = true;
        }
    for (sphere const& s : sc.spheres)
        if (intersect_sphere(s, org, dir, t_max, tmp)) {
            rec = tmp;
            t_max = tmp.t;
            found = true;
        }
    return found;
}

// Cosine-weighted hemisphere direction about n from one 2-pair (polar map;
// the seam at u_a = 0 is an accepted score discontinuity).
vec3 cosine_sample(vec3 const& n, double ua, double ub)
{
    double const phi = 2.0 * std::numbers::pi * ua;
    double const r = std::sqrt(ub);
    double const zl = std::sqrt(std::max(0.0, 1.0 - ub));
    vec3 const helper = std::abs(n.x) < 0.9 ? vec3{ 1, 0, 0 } : vec3{ 0, 1, 0 };
    vec3 const t1 = normalize(cross(n, helper));
    vec3 const t2 = cross(n, t1);
    return normalize((r * std::cos(phi)) * t1 + (r * std::sin(phi)) * t2 + zl * n);
}

} // namespace

target_evaluation trace(scene const& sc, torus_point const& u)
{
    double const aspect = static_cast<double>(sc.width) / sc.height;
    double const tan_half = std::tan(0.5 * sc.camera.fov);
    vec3 const fwd = normalize(sc.camera.look_at - sc.camera.position);
    vec3 const right = normalize(cross(fwd, sc.camera.up));
    vec3 const upv = cross(right, fwd);

    double const sx = 2.0 * u[0] - 1.0;
    double const sy = 2.0 * u[1] - 1.0;
    vec3 org = sc.camera.position;
    vec3 dir = normalize(fwd + (sx * aspect * tan_half) * right + (sy * tan_half) * upv);

    rgb contribution{ 0, 0, 0 };
    rgb throughput{ 1, 1, 1 };
    for (int depth = 0;; ++depth) {
        hit_record rec;
        if (!intersect_scene(sc, org, dir, rec))
            break;
        contribution[0] += throughput[0] * rec.emission[0];
        contribution[1] += throughput[1] * rec.emission[1];
        contribution[2] += throughput[2] * rec.emission[2];
        if (depth == sc.max_depth)
            break;
        vec3 n = rec.normal;
        if (dot(n, dir) > 0.0)
            n = -1.0 * n;
        throughput[0] *= rec.albedo[0];
        throughput[1] *= rec.albedo[1];
        throughput[2] *= rec.albedo[2];
        dir = cosine_sample(n, u[2 + 2 * depth], u[3 + 2 * depth]);
        org = rec.point + kHitOffset * n;
    }

    target_evaluation e;
    e.f = contribution;
    e.p = luminance(contribution);
    e.pixel = pixel_index_of(u[0], u[1], sc.width, sc.height);
    return e;
}

image render_reference(scene const& sc, int spp, std::uint64_t seed, int threads)
{
    image img(sc.width, sc.height);
    int const pixel_count = sc.width * sc.height;
    if (threads <= 0) {
        unsigned const hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    std::atomic<int> next{ 0 };
    auto worker = [&] {
        std::vector<double> coords(static_cast<std::size_t>(sc.dim()));
        for (;;) {
            int const pix = next.fetch_add(1);
            if (pix >= pixel_count)
                return;
            int const px = pix % sc.width;
            int const py = pix / sc.width;
            rgb sum{ 0, 0, 0 };
            for (int s = 0; s < spp; ++s) {
                philox_rng rng = philox_rng::for_stream(static_cast<std::uint64_t>(pix), seed,
                                                        static_cast<std::uint32_t>(s), 3);
                coords[0] = (px + rng.uniform()) / sc.width;
                coords[1] = (py + rng.uniform()) / sc.height;
                for (int i = 2; i < sc.dim(); ++i)
                    coords[static_cast<std::size_t>(i)] = rng.uniform();
                sum = sum + trace(sc, torus_point{ coords }).f;
            }
            img.pixels[static_cast<std::size_t>(pix)] = (1.0 / spp) * sum;
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads - 1; ++i)
        pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool)
        th.join();
    return img;
}

rgb contribution_bound(scene const& sc)
{
    double a_max = 0.0, e_max = 0.0;
    for (quad const& q : sc.quads) {
        for (double a : q.albedo)
            a_max = std::max(a_max, a);
        for (double e : q.emission)
            e_max = std::max(e_max, e);
    }
    for (sphere const& s : sc.spheres) {
        for (double a : s.albedo)
            a_max = std::max(a_max, a);
        for (double e : s.emission)
            e_max = std::max(e_max, e);
    }
    double bound = 0.0, pow_a = 1.0;
    for (int k = 0; k <= sc.max_depth; ++k) {
        bound += pow_a * e_max;
        pow_a *= a_max;
    }
    return rgb{ bound, bound, bound };
}

scene make_furnace_box(double albedo, double emission, int width, int height, int max_depth)
{
    scene sc;
    sc.width = width;
    sc.height = height;
    sc.max_depth = max_depth;
    sc.camera.position = { 0.5, 0.5, 0.5 };
    sc.camera.look_at = { 0.5, 0.5, 1.0 };
    sc.camera.fov = 1.1;
    rgb const a{ albedo, albedo, albedo };
    rgb const e{ emission, emission, emission };
    auto wall = [&](vec3 o, vec3 eu, vec3 ev) { sc.quads.push_back({ o, eu, ev, a, e }); };
    wall({ 0, 0, 0 }, { 1, 0, 0 }, { 0, 0, 1 }); // floor
    wall({ 0, 1, 0 }, { 1, 0, 0 }, { 0, 0, 1 }); // ceiling
    wall({ 0, 0, 0 }, { 0, 1, 0 }, { 0, 0, 1 }); // left
    wall({ 1, 0, 0 }, { 0, 1, 0 }, { 0, 0, 1 }); // right
    wall({ 0, 0, 1 }, { 1, 0, 0 }, { 0, 1, 0 }); // back
    wall({ 0, 0, 0 }, { 1, 0, 0 }, { 0, 1, 0 }); // front
    return sc;
}

scene make_cornell_box(int width, int height, int max_depth)
{
    scene sc;
    sc.width = width;
    sc.height = height;
    sc.max_depth = max_depth;
    sc.camera.position = { 0.5, 0.5, -1.35 };
    sc.camera.look_at = { 0.5, 0.5, 0.5 };
    sc.camera.fov = 0.65;

    rgb const white{ 0.73, 0.73, 0.73 };
    rgb const red{ 0.65, 0.05, 0.05 };
    rgb const green{ 0.12, 0.45, 0.15 };
    rgb const none{ 0, 0, 0 };

    sc.quads.push_back({ { 0, 0, 0 }, { 1, 0, 0 }, { 0, 0, 1 }, white, none }); // floor
    sc.quads.push_back({ { 0, 1, 0 }, { 1, 0, 0 }, { 0, 0, 1 }, white, none }); // ceiling
    sc.quads.push_back({ { 0, 0, 1 }, { 1, 0, 0 }, { 0, 1, 0 }, white, none }); // back
    sc.quads.push_back({ { 0, 0, 0 }, { 0, 1, 0 }, { 0, 0, 1 }, red, none });   // left
    sc.quads.push_back({ { 1, 0, 0 }, { 0, 1, 0 }, { 0, 0, 1 }, green, none }); // right
    // Small ceiling emitter just below the ceiling plane.
    sc.quads.push_back({ { 0.38, 0.9985, 0.38 }, { 0.24, 0, 0 }, { 0, 0, 0.24 },
                         none, rgb{ 18.0, 16.4, 13.7 } });
    sc.spheres.push_back({ { 0.35, 0.22, 0.55 }, 0.22, rgb{ 0.66, 0.66, 0.66 }, none });
    return sc;
}

} // namespace diffrestore
