#include "kinemotion/packing.hpp"

#include "kinemotion/errors.hpp"
#include "kinemotion/rotation_grad.hpp"

namespace kinemotion {

std::string to_string(Representation rep) {
    switch (rep) {
        case Representation::AxisAngle: return "expmap";
        case Representation::Quaternion: return "quat";
        case Representation::Stiefel: return "stiefel";
        case Representation::Coords: return "coords";
    }
    return "?";
}

Representation representation_from_string(const std::string& name) {
    if (name == "expmap" || name == "axis_angle" || name == "aa") return Representation::AxisAngle;
    if (name == "quat" || name == "quaternion") return Representation::Quaternion;
    if (name == "stiefel") return Representation::Stiefel;
    if (name == "coords" || name == "positions") return Representation::Coords;
    throw ConfigError("unknown representation '" + name +
                      "' (expected expmap, quat, stiefel, or coords)");
}

int full_block_width(Representation rep) {
    switch (rep) {
        case Representation::AxisAngle: return 3;
        case Representation::Quaternion: return 4;
        case Representation::Stiefel: return 6;
        case Representation::Coords: return 3;
    }
    return 0;
}

Packing::Packing(const SkeletonSpec& skel, Representation rep) : skel_(skel), rep_(rep) {
    skel_.validate();
    int offset = 0;
    for (int k = 0; k < skel_.bone_count(); ++k) {
        PackedBlock b;
        b.bone = k;
        b.offset = offset;
        if (rep_ == Representation::Coords) {
            b.width = 3;
            b.full = true;
        } else if (skel_.bones[k].enabled_axes() == 3) {
            b.width = full_block_width(rep_);
            b.full = true;
        } else {
            b.width = skel_.bones[k].enabled_axes();
            b.full = false;
        }
        offset += b.width;
        blocks_.push_back(b);
    }
    dim_ = offset;
}

Eigen::VectorXd Packing::pack(const PoseFrame& frame) const {
    Eigen::VectorXd out(dim_);
    if (rep_ == Representation::Coords) {
        PoseFrame at_origin = frame;
        at_origin.root_t.setZero();
        std::vector<Eigen::Vector3d> joints = forward_kinematics(skel_, at_origin);
        for (const PackedBlock& b : blocks_) {
            out.segment<3>(b.offset) = joints[b.bone];
        }
        return out;
    }
    if (static_cast<int>(frame.rot.size()) != skel_.bone_count()) {
        throw TopologyMismatch("pack: frame bone count mismatch");
    }
    for (const PackedBlock& b : blocks_) {
        const Rotation& r = frame.rot[b.bone];
        if (b.full) {
            switch (rep_) {
                case Representation::AxisAngle:
                    out.segment<3>(b.offset) = axis_angle_from_matrix(r).w;
                    break;
                case Representation::Quaternion:
                    out.segment<4>(b.offset) = quat_from_matrix(r).q;
                    break;
                case Representation::Stiefel:
                    out.segment<6>(b.offset) = stiefel_from_matrix(r).r;
                    break;
                case Representation::Coords: break;  // handled above
            }
        } else {
            EulerAngles e = euler_from_matrix(r);
            const double comps[3] = {e.yaw, e.pitch, e.roll};
            int at = b.offset;
            for (int axis = 0; axis < 3; ++axis) {
                if (skel_.bones[b.bone].dof[axis]) out[at++] = comps[axis];
            }
        }
    }
    return out;
}

std::vector<Rotation> Packing::unpack(const Eigen::VectorXd& packed) const {
    if (rep_ == Representation::Coords) {
        throw Error("coords representation cannot be unpacked into rotations");
    }
    if (packed.size() != dim_) {
        throw DimensionMismatch("unpack: expected " + std::to_string(dim_) + " values, got " +
                                std::to_string(packed.size()));
    }
    std::vector<Rotation> rots(skel_.bone_count());
    for (const PackedBlock& b : blocks_) {
        if (b.full) {
            switch (rep_) {
                case Representation::AxisAngle:
                    rots[b.bone] = matrix_from_axis_angle(AxisAngle(packed.segment<3>(b.offset)));
                    break;
                case Representation::Quaternion:
                    rots[b.bone] = matrix_from_quat(Quaternion(packed.segment<4>(b.offset)));
                    break;
                case Representation::Stiefel:
                    rots[b.bone] = matrix_from_stiefel(
                        StiefelRot(Eigen::Matrix<double, 6, 1>(packed.segment<6>(b.offset))));
                    break;
                case Representation::Coords: break;
            }
        } else {
            EulerAngles e;
            double comps[3] = {0.0, 0.0, 0.0};
            int at = b.offset;
            for (int axis = 0; axis < 3; ++axis) {
                if (skel_.bones[b.bone].dof[axis]) comps[axis] = packed[at++];
            }
            e.yaw = comps[0];
            e.pitch = comps[1];
            e.roll = comps[2];
            rots[b.bone] = matrix_from_euler(e);
        }
    }
    return rots;
}

PoseFrame Packing::unpack_frame(const Eigen::VectorXd& packed, const Eigen::Vector3d& root_t) const {
    PoseFrame frame;
    frame.root_t = root_t;
    frame.rot = unpack(packed);
    return frame;
}

Eigen::VectorXd Packing::unpack_backward(const Eigen::VectorXd& packed,
                                         const std::vector<Eigen::Matrix3d>& rot_bar) const {
    if (rep_ == Representation::Coords) {
        throw Error("coords representation has no rotation adjoint");
    }
    if (packed.size() != dim_ || static_cast<int>(rot_bar.size()) != skel_.bone_count()) {
        throw DimensionMismatch("unpack_backward: shape mismatch");
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim_);
    for (const PackedBlock& b : blocks_) {
        const Eigen::Matrix3d& rbar = rot_bar[b.bone];
        if (b.full) {
            switch (rep_) {
                case Representation::AxisAngle:
                    grad.segment<3>(b.offset) =
                        axis_angle_backward(AxisAngle(packed.segment<3>(b.offset)), rbar);
                    break;
                case Representation::Quaternion:
                    grad.segment<4>(b.offset) =
                        quat_backward(Quaternion(packed.segment<4>(b.offset)), rbar);
                    break;
                case Representation::Stiefel:
                    grad.segment<6>(b.offset) = stiefel_backward(
                        StiefelRot(Eigen::Matrix<double, 6, 1>(packed.segment<6>(b.offset))), rbar);
                    break;
                case Representation::Coords: break;
            }
        } else {
            EulerAngles e;
            double comps[3] = {0.0, 0.0, 0.0};
            int at = b.offset;
            for (int axis = 0; axis < 3; ++axis) {
                if (skel_.bones[b.bone].dof[axis]) comps[axis] = packed[at++];
            }
            e.yaw = comps[0];
            e.pitch = comps[1];
            e.roll = comps[2];
            Eigen::Vector3d g = euler_backward(e, rbar);
            at = b.offset;
            for (int axis = 0; axis < 3; ++axis) {
                if (skel_.bones[b.bone].dof[axis]) grad[at++] = g[axis];
            }
        }
    }
    return grad;
}

}  // namespace kinemotion
