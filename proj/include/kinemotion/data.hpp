#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinemotion/packing.hpp"
#include "kinemotion/skeleton.hpp"

// Dataset ingestion, synthetic data, and the evaluation metrics (MAE, MPE,
// Zero-Velocity baseline).
//
// CSV pose format: one frame per line; 3 global-translation fields followed
// by 3 exponential-map (axis-angle) fields per bone, in skeleton bone order.
// A blank line separates sequences within one file.

namespace kinemotion {

struct MotionDataset {
    SkeletonSpec skeleton;
    std::vector<PoseSequence> sequences;
    double frame_rate = 25.0;  // Hz
};

// Raw numeric CSV rows (used by representation conversion). Throws
// ParseError(line, column) on non-numeric fields; blank rows are dropped and
// `row_lines` (if given) records each kept row's 1-based source line.
std::vector<std::vector<double>> load_numeric_csv(const std::string& path,
                                                  std::vector<int>* row_lines = nullptr);

// Parses the exponential-map format against `skeleton`. Ragged or
// wrong-width lines raise ParseError naming the line; an empty file raises
// EmptyDataset.
MotionDataset load_expmap_csv(const std::string& path, const SkeletonSpec& skeleton,
                              double frame_rate = 25.0);

void save_expmap_csv(const std::string& path, const MotionDataset& dataset);

// A `bones`-long unit-x chain where bone k's yaw angle at frame j is
// amplitude·sin(2πf·j/frame_rate + φ_k), with per-bone phases φ_k drawn once
// from `seed`. Smooth, band-limited, deterministic. All axes stay enabled in
// the skeleton even though the motion only exercises yaw.
MotionDataset synth_pendulum(int bones, int frames, double freq, double amplitude,
                             std::uint64_t seed, double frame_rate = 25.0);

// ---- Metrics ---------------------------------------------------------------

struct MaeProtocol {
    // Norm the sum of the three Euler deltas (one convention in circulation)
    // instead of the per-component 3-vector norm (the default protocol).
    bool summed = false;
    // Include the root bone's rotation (fish/mouse convention).
    bool include_root = false;
};

// Mean angle error per predicted frame: per bone, wrap the Euler-angle
// deltas to (−π, π], take the protocol norm, then average over bones. The
// root bone is excluded unless `include_root`.
std::vector<double> mae(const SkeletonSpec& skeleton, const PoseSequence& pred,
                        const PoseSequence& target, const MaeProtocol& protocol = {});

// Mean position error per frame: both poses FK'd with translation zeroed
// (global rotation retained), mean over joints of the Euclidean error.
std::vector<double> mpe(const SkeletonSpec& skeleton, const PoseSequence& pred,
                        const PoseSequence& target);

// T copies of the last input frame.
PoseSequence zero_velocity(const PoseSequence& input, int T);

// Milliseconds → 1-based prediction frame index at `fps` (nearest frame).
int horizon_frame(double ms, double fps);

// Wrap an angle to (−π, π].
double wrap_angle(double x);

}  // namespace kinemotion
