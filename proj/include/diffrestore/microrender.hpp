#ifndef DIFFRESTORE_MICRORENDER_HPP
#define DIFFRESTORE_MICRORENDER_HPP

#include <vector>

#include "diffrestore/image.hpp"
#include "diffrestore/targets.hpp"
#include "diffrestore/torus.hpp"

namespace diffrestore {

struct vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline vec3 operator+(vec3 a, vec3 const& b) { return { a.x + b.x, a.y + b.y, a.z + b.z }; }
inline vec3 operator-(vec3 a, vec3 const& b) { return { a.x - b.x, a.y - b.y, a.z - b.z }; }
inline vec3 operator*(double s, vec3 v) { return { s * v.x, s * v.y, s * v.z }; }
inline double dot(vec3 const& a, vec3 const& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline vec3 cross(vec3 const& a, vec3 const& b)
{
    return { a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x };
}
vec3 normalize(vec3 v);

struct pinhole_camera {
    vec3 position{ 0.5, 0.5, -1.2 };
    vec3 look_at{ 0.5, 0.5, 0.5 };
    vec3 up{ 0.0, 1.0, 0.0 };
    double fov = 0.9; // vertical, radians
};

// Parallelogram patch: origin + a*edge_u + b*edge_v, a,b in [0,1].
struct quad {
    vec3 origin, edge_u, edge_v;
    rgb albedo{ 0, 0, 0 };
    rgb emission{ 0, 0, 0 };
};

struct sphere {
    vec3 center;
    double radius = 1.0;
    rgb albedo{ 0, 0, 0 };
    rgb emission{ 0, 0, 0 };
};

// Diffuse+emissive scene traced from primary sample space: dimension
// d = 2 + 2*max_depth (pixel pair plus one pair per bounce), fixed depth, no
// Russian roulette, so the path is a deterministic function of u.
struct scene {
    pinhole_camera camera;
    std::vector<quad> quads;
    std::vector<sphere> spheres;
    int width = 32;
    int height = 32;
    int max_depth = 2;

    int dim() const { return 2 + 2 * max_depth; }
};

struct path_contribution {
    rgb f{ 0, 0, 0 };
    double lum = 0.0;
};

// Deterministic map u -> path contribution. u[0], u[1] give the continuous
// image-plane position (pixelIndex by floor); each later pair drives one
// cosine-weighted diffuse bounce. Misses contribute nothing.
target_evaluation trace(scene const& sc, torus_point const& u);

// Stratified independent sampling, spp per pixel, deterministic given seed.
image render_reference(scene const& sc, int spp, std::uint64_t seed, int threads);

// Upper bound sum_{k<=D} a_max^k E_max per channel (energy conservation).
rgb contribution_bound(scene const& sc);

// TargetDensity view of a scene: p = luminance(f); scores by the inherited
// central-difference rule.
class renderer_target final : public target_density {
public:
    explicit renderer_target(scene sc) : m_scene(std::move(sc)) {}

    int dim() const override { return m_scene.dim(); }
    int image_width() const override { return m_scene.width; }
    int image_height() const override { return m_scene.height; }
    target_evaluation eval(torus_point const& x) const override { return trace(m_scene, x); }

    scene const& scene_ref() const { return m_scene; }

private:
    scene m_scene;
};

// Closed box with uniform albedo and emission on every face; the camera sits
// inside, so every path segment hits a wall and the per-pixel value is the
// depth-truncated geometric series sum_{k<=D} a^k E exactly.
scene make_furnace_box(double albedo, double emission, int width, int height, int max_depth);

// Desk-scale Cornell-style box: colored side walls, one small ceiling
// emitter, one diffuse sphere. Defaults to 2 bounces (d = 6).
scene make_cornell_box(int width = 32, int height = 32, int max_depth = 2);

} // namespace diffrestore

#endif
