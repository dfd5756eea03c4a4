#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinemotion/rotation.hpp"

// Kinematic-chain description and forward kinematics.
//
// A skeleton is a list of bones in topological order: bone 0 is the root
// (parent −1) and every other bone's parent precedes it. Each bone carries a
// rest offset T_k (its vector in the parent frame) and a per-axis DoF mask in
// (yaw, pitch, roll) order marking which intrinsic Euler axes the data
// actually exercises.
//
// Forward kinematics accumulates world rotations down the tree,
//   Q_k = Q_parent(k) · R_k,   Υ_k = Q_k · T_k + Υ_parent(k),
// with the root's parent anchored at the frame's global translation. The
// returned joints are the bone-end joints, one per bone; bone lengths ‖T_k‖
// are invariant under any pose.

namespace kinemotion {

struct Bone {
    std::string name;
    int parent = -1;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    std::array<bool, 3> dof = {true, true, true};  // yaw, pitch, roll

    int enabled_axes() const { return int(dof[0]) + int(dof[1]) + int(dof[2]); }
};

struct SkeletonSpec {
    std::string name;
    std::vector<Bone> bones;

    int bone_count() const { return static_cast<int>(bones.size()); }

    // Enabled rotational axes over all bones, plus the root's 3 translational
    // DoF.
    int total_dof() const;

    // Throws TopologyMismatch unless bones form a rooted tree in topological
    // order with finite offsets.
    void validate() const;
};

// One pose: a global translation plus a local rotation per bone.
struct PoseFrame {
    Eigen::Vector3d root_t = Eigen::Vector3d::Zero();
    std::vector<Rotation> rot;
};

struct PoseSequence {
    std::vector<PoseFrame> frames;

    int size() const { return static_cast<int>(frames.size()); }
    bool empty() const { return frames.empty(); }
};

// ---- Forward kinematics ----------------------------------------------------

// Bone-end joint positions in the world frame, one per bone.
// Throws TopologyMismatch if the frame's bone count disagrees.
std::vector<Eigen::Vector3d> forward_kinematics(const SkeletonSpec& skel, const PoseFrame& frame);

// FK with the intermediate world rotations kept for the backward pass.
struct FkCache {
    std::vector<Rotation> world;          // Q_k
    std::vector<Eigen::Vector3d> joints;  // Υ_k
};
FkCache forward_kinematics_full(const SkeletonSpec& skel, const PoseFrame& frame);

// Adjoint of forward kinematics: given ∂L/∂Υ_k for every bone-end joint,
// produce ∂L/∂R_k (local rotations, elementwise) and ∂L/∂root_t by walking
// the tree in reverse topological order.
struct FkGrad {
    std::vector<Eigen::Matrix3d> rot;
    Eigen::Vector3d root_t = Eigen::Vector3d::Zero();
};
FkGrad fk_backward(const SkeletonSpec& skel, const PoseFrame& frame, const FkCache& cache,
                   const std::vector<Eigen::Vector3d>& joints_bar);

// ---- Degrees of freedom ----------------------------------------------------

// Derives per-bone DoF masks from data: an axis is enabled iff its intrinsic
// Euler angle exceeds `tol` in magnitude anywhere in the sequences.
// Throws EmptyDataset when `sequences` holds no frames at all.
std::vector<std::array<bool, 3>> extract_dof_mask(const SkeletonSpec& skel,
                                                  const std::vector<PoseSequence>& sequences,
                                                  double tol = 1e-6);

// Zeroes the disabled Euler components of one rotation and rebuilds it.
// Idempotent: projecting twice equals projecting once.
Rotation project_to_dof(const Rotation& r, const std::array<bool, 3>& mask);

// Applies project_to_dof across a whole frame using the skeleton's masks.
PoseFrame project_to_dof(const SkeletonSpec& skel, const PoseFrame& frame);

// ---- Presets and serialization ----------------------------------------------

// Built-in skeletons: "human36" (17 bones, 42 DoF), "fish" (20 bones,
// 25 DoF), "mouse" (4 bones, 12 DoF). Throws UnknownPreset otherwise.
SkeletonSpec make_preset(const std::string& name);

// JSON round trip: {"name": ..., "bones": [{"name", "parent", "offset",
// "dof"}, ...]}. Unknown keys are rejected.
std::string skeleton_to_json(const SkeletonSpec& skel);
SkeletonSpec skeleton_from_json(const std::string& text);
SkeletonSpec load_skeleton(const std::string& path);
void save_skeleton(const SkeletonSpec& skel, const std::string& path);

}  // namespace kinemotion
