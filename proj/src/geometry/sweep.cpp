#include "ctmp/geometry/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <vector>

namespace ctmp::geo {

SweepParams sweep_params(const Scene& scene, bool holding)
{
    const double r = holding ? scene.robot.holding_radius : scene.robot.gripper_radius;
    return {r * r, scene.object.radius, scene.object.height / 2};
}

void scan_scalar(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs,
                 std::span<const double> ys, std::span<const double> zs, std::span<std::uint8_t> hits)
{
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::uint8_t hit = 0;
        for (const Vec3& s : samples) {
            const double dx = s.x - xs[i];
            const double dy = s.y - ys[i];
            const double dxy = std::sqrt(dx * dx + dy * dy);
            const double dr = std::max(dxy - p.obj_radius, 0.0);
            const double dz = std::max(std::abs(s.z - zs[i]) - p.half_height, 0.0);
            if (dr * dr + dz * dz <= p.radius_sq) {
                hit = 1;
                break;
            }
        }
        hits[i] = hit;
    }
}

bool avx2_available()
{
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

ScanFn select_scan()
{
    const char* env = std::getenv("CTMP_SIMD");
    if (env && std::strcmp(env, "scalar") == 0)
        return &scan_scalar;
    return avx2_available() ? &scan_avx2 : &scan_scalar;
}

}  // namespace

ScanFn active_scan()
{
    static const ScanFn fn = select_scan();
    return fn;
}

const char* active_scan_name()
{
    return active_scan() == &scan_avx2 ? "avx2" : "scalar";
}

void scan(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs, std::span<const double> ys,
          std::span<const double> zs, std::span<std::uint8_t> hits)
{
    std::fill(hits.begin(), hits.end(), std::uint8_t{0});
    if (samples.empty())
        return;
    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo_x = inf, lo_y = inf, lo_z = inf, hi_x = -inf, hi_y = -inf, hi_z = -inf;
    for (const Vec3& s : samples) {
        lo_x = std::min(lo_x, s.x), hi_x = std::max(hi_x, s.x);
        lo_y = std::min(lo_y, s.y), hi_y = std::max(hi_y, s.y);
        lo_z = std::min(lo_z, s.z), hi_z = std::max(hi_z, s.z);
    }
    // The margin absorbs rounding in the kernels' distance arithmetic, so a
    // dropped obstacle is one the kernels would also reject.
    const double r = std::sqrt(p.radius_sq);
    const double mxy = r + p.obj_radius + 1e-9;
    const double mz = r + p.half_height + 1e-9;

    thread_local std::vector<std::size_t> keep;
    thread_local std::vector<double> kx, ky, kz;
    thread_local std::vector<std::uint8_t> kh;
    keep.clear(), kx.clear(), ky.clear(), kz.clear();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < lo_x - mxy || xs[i] > hi_x + mxy || ys[i] < lo_y - mxy || ys[i] > hi_y + mxy ||
            zs[i] < lo_z - mz || zs[i] > hi_z + mz)
            continue;
        keep.push_back(i);
        kx.push_back(xs[i]), ky.push_back(ys[i]), kz.push_back(zs[i]);
    }
    kh.assign(keep.size(), 0);
    active_scan()(samples, p, kx, ky, kz, kh);
    for (std::size_t j = 0; j < keep.size(); ++j)
        hits[keep[j]] = kh[j];
}

}  // namespace ctmp::geo
