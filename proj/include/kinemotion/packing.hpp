#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinemotion/skeleton.hpp"

// The seam between poses and the network: a pose frame is packed into one
// flat vector, bone by bone.
//
//  * Bones with all three Euler axes enabled contribute a full block of the
//    chosen representation: axis-angle 3, quaternion 4 (scalar first,
//    canonical), Stiefel 6.
//  * Bones with fewer enabled axes contribute just their enabled intrinsic
//    Euler components, in (yaw, pitch, roll) order — the network only ever
//    sees coordinates the data actually moves.
//  * The coords representation packs the FK bone-end positions (3 per bone,
//    global translation ignored); it cannot be unpacked back to rotations.
//  * Global root translation is never packed.

namespace kinemotion {

enum class Representation { AxisAngle, Quaternion, Stiefel, Coords };

std::string to_string(Representation rep);
Representation representation_from_string(const std::string& name);

// Width of a full (3-axis) block in each representation.
int full_block_width(Representation rep);

struct PackedBlock {
    int bone = 0;
    int offset = 0;  // start within the packed vector
    int width = 0;
    bool full = false;  // full representation block vs. Euler components
};

class Packing {
  public:
    Packing(const SkeletonSpec& skel, Representation rep);

    const SkeletonSpec& skeleton() const { return skel_; }
    Representation representation() const { return rep_; }
    const std::vector<PackedBlock>& blocks() const { return blocks_; }
    int dim() const { return dim_; }

    // Pose → flat vector. For Coords this runs FK with the translation
    // zeroed.
    Eigen::VectorXd pack(const PoseFrame& frame) const;

    // Flat vector → per-bone local rotations. Throws DimensionMismatch on a
    // wrong-sized vector and Error for the Coords representation.
    std::vector<Rotation> unpack(const Eigen::VectorXd& packed) const;

    // Convenience: unpack into a frame carrying the given translation.
    PoseFrame unpack_frame(const Eigen::VectorXd& packed, const Eigen::Vector3d& root_t) const;

    // Adjoint of unpack: scatter ∂L/∂R_k (per bone) back to ∂L/∂packed.
    Eigen::VectorXd unpack_backward(const Eigen::VectorXd& packed,
                                    const std::vector<Eigen::Matrix3d>& rot_bar) const;

  private:
    SkeletonSpec skel_;
    Representation rep_;
    std::vector<PackedBlock> blocks_;
    int dim_ = 0;
};

}  // namespace kinemotion
