#include <immintrin.h>

#include "ctmp/geometry/sweep.hpp"

namespace ctmp::geo {

__attribute__((target("avx2"))) void scan_avx2(std::span<const Vec3> samples, const SweepParams& p,
                                               std::span<const double> xs, std::span<const double> ys,
                                               std::span<const double> zs, std::span<std::uint8_t> hits)
{
    const std::size_t n = xs.size();
    const std::size_t full = n - n % 4;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d ro = _mm256_set1_pd(p.obj_radius);
    const __m256d hh = _mm256_set1_pd(p.half_height);
    const __m256d r2 = _mm256_set1_pd(p.radius_sq);
    const __m256d sign = _mm256_set1_pd(-0.0);

    for (std::size_t i = 0; i < full; i += 4) {
        const __m256d cx = _mm256_loadu_pd(xs.data() + i);
        const __m256d cy = _mm256_loadu_pd(ys.data() + i);
        const __m256d cz = _mm256_loadu_pd(zs.data() + i);
        int mask = 0;
        for (const Vec3& s : samples) {
            const __m256d dx = _mm256_sub_pd(_mm256_set1_pd(s.x), cx);
            const __m256d dy = _mm256_sub_pd(_mm256_set1_pd(s.y), cy);
            const __m256d dxy = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
            // max(x, 0): operand order matches std::max(x, 0.0) on non-NaN input.
            const __m256d dr = _mm256_max_pd(_mm256_sub_pd(dxy, ro), zero);
            const __m256d adz = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_set1_pd(s.z), cz));
            const __m256d dz = _mm256_max_pd(_mm256_sub_pd(adz, hh), zero);
            const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(dz, dz));
            mask |= _mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ));
            if (mask == 0xF)
                break;
        }
        for (int l = 0; l < 4; ++l)
            hits[i + static_cast<std::size_t>(l)] = static_cast<std::uint8_t>((mask >> l) & 1);
    }
    if (full < n)
        scan_scalar(samples, p, xs.subspan(full), ys.subspan(full), zs.subspan(full), hits.subspan(full));
}

}  // namespace ctmp::geo
