/* Branch-free float32 SiLU loops. The exp is a Cephes-style range-reduced
 * polynomial (max rel. error ~2e-7) so the loops vectorize.
 *
 * The sigmoid only ever evaluates exp(-|a|), clamped at -80, so no lane
 * (including ones the vectorizer computes and then discards) produces a
 * subnormal. Subnormals trigger microcode assists and cost ~10x. */
#ifndef LEDIFLOW_SILU_H
#define LEDIFLOW_SILU_H

#include <math.h>
#include <stdint.h>
#include <string.h>
#include <stddef.h>

/* exp(x) for x <= 0 */
static inline float ldf_expf_neg(float x)
{
    x = x < -80.0f ? -80.0f : x;
    /* round-half-up via truncation; the biased argument stays positive */
    float fx = (float)(int32_t)(x * 1.44269504088896341f + 127.5f) - 127.0f;
    x = x - fx * 0.693359375f;
    x = x - fx * -2.12194440e-4f;
    float y = 1.9875691500e-4f;
    y = y * x + 1.3981999507e-3f;
    y = y * x + 8.3334519073e-3f;
    y = y * x + 4.1665795894e-2f;
    y = y * x + 1.6666665459e-1f;
    y = y * x + 5.0000001201e-1f;
    y = y * x * x + x + 1.0f;
    int32_t bits = ((int32_t)fx + 127) << 23;
    float scale;
    memcpy(&scale, &bits, sizeof(scale));
    return y * scale;
}

static void ldf_silu_forward_f32(const float *restrict a, float *restrict out,
                                 float *restrict sig, ptrdiff_t n)
{
    for (ptrdiff_t i = 0; i < n; i++) {
        float e = ldf_expf_neg(-fabsf(a[i]));
        float r = 1.0f / (1.0f + e);
        float s = a[i] >= 0.0f ? r : e * r;
        sig[i] = s;
        out[i] = a[i] * s;
    }
}

static void ldf_silu_backward_f32(const float *restrict g, const float *restrict a,
                                  const float *restrict sig, float *restrict out,
                                  ptrdiff_t n)
{
    for (ptrdiff_t i = 0; i < n; i++) {
        float s = sig[i];
        out[i] = g[i] * (s + a[i] * s * (1.0f - s));
    }
}

#endif
