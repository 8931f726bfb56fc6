#pragma once

// Batch swept-sphere vs. cylinder tests. One scan checks a sampled trajectory
// against many obstacle centers given in structure-of-arrays form.
//
// The scalar kernel is the reference. The AVX2 kernel evaluates four
// obstacles per lane group with the same operation order and no fused
// multiply-add, so both produce bit-identical verdicts.

#include <cstdint>
#include <span>

#include "ctmp/geometry/geometry.hpp"

namespace ctmp::geo {

struct SweepParams {
    double radius_sq;    // (sweep radius)^2
    double obj_radius;   // r_o
    double half_height;  // h'/2
};

SweepParams sweep_params(const Scene& scene, bool holding);

using ScanFn = void (*)(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs,
                        std::span<const double> ys, std::span<const double> zs, std::span<std::uint8_t> hits);

/// hits[i] = 1 iff some sample lies within the sweep radius of cylinder i.
void scan_scalar(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs,
                 std::span<const double> ys, std::span<const double> zs, std::span<std::uint8_t> hits);
void scan_avx2(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs,
               std::span<const double> ys, std::span<const double> zs, std::span<std::uint8_t> hits);

bool avx2_available();

/// Kernel chosen at startup: AVX2 when the CPU supports it, unless the
/// environment sets CTMP_SIMD=scalar.
ScanFn active_scan();
const char* active_scan_name();

/// Same verdicts as the active kernel, after dropping obstacles outside the
/// samples' inflated bounding box.
void scan(std::span<const Vec3> samples, const SweepParams& p, std::span<const double> xs, std::span<const double> ys,
          std::span<const double> zs, std::span<std::uint8_t> hits);

}  // namespace ctmp::geo
