#pragma once

#include <vector>

#include "rayfield/kernels.hpp"
#include "rayfield/representations.hpp"

namespace rayfield {

/// Index of the anchor parameter nearest to t (ties go to the lower index),
/// or -1 when t lies more than half a spacing beyond either end.
int nearest_anchor(const std::vector<double>& params, double t);

/// Indices i (ascending) with ray_distance(query, ray_i) <= d0 and
/// ray_angle(query, ray_i) <= beta0.
std::vector<int> neighborhood(const SampledRayField& field, const Ray& query, const KernelSupport& support);

/// Sum over neighbors y of kappa(s(query)^-1 y) rho_in(h(s(query)^-1 s(y))) f(y).
/// Irrep input and output types; throws Error(kMissingBankEntry) when the bank
/// has no (field type, type_out) entry.
Feature conv_ray_to_ray(const SampledRayField& field, const KernelBank& bank, const Ray& query,
                        const FieldType& type_out);

/// Same for many queries, evaluated in parallel.
std::vector<Feature> conv_ray_to_ray(const SampledRayField& field, const KernelBank& bank,
                                     const std::vector<Ray>& queries, const FieldType& type_out);

/// Ray-to-point convolution for a real scalar ray field. Neighbors are the
/// rays passing within d0 of p. Throws Error(kInvalidArgument) for other inputs.
Feature conv_ray_to_point(const SampledRayField& field, const KernelBank& bank, const Vec3& p, int l_out);

/// Ray-to-point convolution at many points, as a real point field.
SampledPointField conv_ray_to_point(const SampledRayField& field, const KernelBank& bank,
                                    const std::vector<Vec3>& points, int l_out);

/// Regular-output convolution: each neighbor contributes one weighted sample
/// at its height along the query, accumulated into the nearest anchor.
/// Samples beyond half a spacing past either end anchor are dropped.
AnchoredSamples conv_ray_to_ray_regular(const SampledRayField& field, const KernelBank& bank, const Ray& query,
                                        int omega1_out, const std::vector<Vec3>& anchors);

/// Convolution restricted to rays through one camera center, written on the
/// sphere of directions. Requires zero translation frequencies on input and
/// output. Neighbors are selected by angle only. Throws Error(kInvalidArgument)
/// if a field ray misses the center by more than 1e-9.
Feature spherical_conv_intra_view(const SampledRayField& field, const Vec3& center, const KernelBank& bank,
                                  const Vec3& query_direction, const FieldType& type_out);

}  // namespace rayfield
