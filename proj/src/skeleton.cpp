#include "kinemotion/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kinemotion/errors.hpp"

namespace kinemotion {

namespace {

void check_frame(const SkeletonSpec& skel, const PoseFrame& frame) {
    if (static_cast<int>(frame.rot.size()) != skel.bone_count()) {
        throw TopologyMismatch("pose frame has " + std::to_string(frame.rot.size()) +
                               " rotations for a skeleton with " +
                               std::to_string(skel.bone_count()) + " bones");
    }
}

}  // namespace

int SkeletonSpec::total_dof() const {
    int n = 3;  // root translation
    for (const Bone& b : bones) n += b.enabled_axes();
    return n;
}

void SkeletonSpec::validate() const {
    if (bones.empty()) {
        throw TopologyMismatch("skeleton has no bones");
    }
    if (bones[0].parent != -1) {
        throw TopologyMismatch("bone 0 must be the root (parent -1)");
    }
    for (int k = 1; k < bone_count(); ++k) {
        if (bones[k].parent < 0 || bones[k].parent >= k) {
            throw TopologyMismatch("bone " + std::to_string(k) +
                                   " parent must precede it (got " +
                                   std::to_string(bones[k].parent) + ")");
        }
    }
    for (const Bone& b : bones) {
        if (!b.offset.allFinite()) {
            throw TopologyMismatch("bone offset is not finite");
        }
    }
}

std::vector<Eigen::Vector3d> forward_kinematics(const SkeletonSpec& skel, const PoseFrame& frame) {
    return forward_kinematics_full(skel, frame).joints;
}

FkCache forward_kinematics_full(const SkeletonSpec& skel, const PoseFrame& frame) {
    check_frame(skel, frame);
    const int m = skel.bone_count();
    FkCache cache;
    cache.world.resize(m);
    cache.joints.resize(m);
    for (int k = 0; k < m; ++k) {
        const Bone& b = skel.bones[k];
        if (b.parent < 0) {
            cache.world[k] = frame.rot[k];
            cache.joints[k] = cache.world[k] * b.offset + frame.root_t;
        } else {
            cache.world[k] = cache.world[b.parent] * frame.rot[k];
            cache.joints[k] = cache.world[k] * b.offset + cache.joints[b.parent];
        }
    }
    return cache;
}

FkGrad fk_backward(const SkeletonSpec& skel, const PoseFrame& frame, const FkCache& cache,
                   const std::vector<Eigen::Vector3d>& joints_bar) {
    check_frame(skel, frame);
    if (joints_bar.size() != cache.joints.size()) {
        throw DimensionMismatch("fk_backward: joint gradient count mismatch");
    }
    const int m = skel.bone_count();
    std::vector<Eigen::Vector3d> pos_bar = joints_bar;
    std::vector<Eigen::Matrix3d> world_bar(m, Eigen::Matrix3d::Zero());
    FkGrad grad;
    grad.rot.assign(m, Eigen::Matrix3d::Zero());

    for (int k = m - 1; k >= 0; --k) {
        const Bone& b = skel.bones[k];
        // Υ_k = Q_k·T_k + Υ_parent.
        world_bar[k] += pos_bar[k] * b.offset.transpose();
        if (b.parent >= 0) {
            pos_bar[b.parent] += pos_bar[k];
        } else {
            grad.root_t += pos_bar[k];
        }
        // Q_k = Q_parent·R_k.
        if (b.parent >= 0) {
            grad.rot[k] = cache.world[b.parent].m.transpose() * world_bar[k];
            world_bar[b.parent] += world_bar[k] * frame.rot[k].m.transpose();
        } else {
            grad.rot[k] = world_bar[k];
        }
    }
    return grad;
}

std::vector<std::array<bool, 3>> extract_dof_mask(const SkeletonSpec& skel,
                                                  const std::vector<PoseSequence>& sequences,
                                                  double tol) {
    size_t total_frames = 0;
    for (const PoseSequence& seq : sequences) total_frames += seq.frames.size();
    if (total_frames == 0) {
        throw EmptyDataset("extract_dof_mask: no frames to inspect");
    }
    std::vector<std::array<bool, 3>> masks(skel.bone_count(), {false, false, false});
    for (const PoseSequence& seq : sequences) {
        for (const PoseFrame& frame : seq.frames) {
            check_frame(skel, frame);
            for (int k = 0; k < skel.bone_count(); ++k) {
                EulerAngles e = euler_from_matrix(frame.rot[k]);
                if (std::abs(e.yaw) > tol) masks[k][0] = true;
                if (std::abs(e.pitch) > tol) masks[k][1] = true;
                if (std::abs(e.roll) > tol) masks[k][2] = true;
            }
        }
    }
    return masks;
}

Rotation project_to_dof(const Rotation& r, const std::array<bool, 3>& mask) {
    EulerAngles e = euler_from_matrix(r);
    if (!mask[0]) e.yaw = 0.0;
    if (!mask[1]) e.pitch = 0.0;
    if (!mask[2]) e.roll = 0.0;
    return matrix_from_euler(e);
}

PoseFrame project_to_dof(const SkeletonSpec& skel, const PoseFrame& frame) {
    check_frame(skel, frame);
    PoseFrame out = frame;
    for (int k = 0; k < skel.bone_count(); ++k) {
        out.rot[k] = project_to_dof(frame.rot[k], skel.bones[k].dof);
    }
    return out;
}

namespace {

Bone bone(std::string name, int parent, double x, double y, double z, bool yaw, bool pitch,
          bool roll) {
    Bone b;
    b.name = std::move(name);
    b.parent = parent;
    b.offset = Eigen::Vector3d(x, y, z);
    b.dof = {yaw, pitch, roll};
    return b;
}

SkeletonSpec preset_human36() {
    SkeletonSpec s;
    s.name = "human36";
    s.bones = {
        bone("root", -1, 0, 0, 0.15, true, true, true),
        bone("lower_spine", 0, 0, 0, 0.25, true, true, true),
        bone("upper_spine", 1, 0, 0, 0.28, true, true, true),
        bone("neck", 2, 0, 0, 0.12, true, true, true),
        bone("head", 3, 0, 0, 0.18, true, true, true),
        bone("l_thigh", 0, -0.13, 0, -0.42, true, true, true),
        bone("l_shin", 5, 0, 0, -0.44, false, true, false),
        bone("l_foot", 6, 0, 0.2, -0.06, false, true, true),
        bone("r_thigh", 0, 0.13, 0, -0.42, true, true, true),
        bone("r_shin", 8, 0, 0, -0.44, false, true, false),
        bone("r_foot", 9, 0, 0.2, -0.06, false, true, true),
        bone("l_upper_arm", 2, -0.3, 0, 0, true, true, true),
        bone("l_forearm", 11, -0.27, 0, 0, false, true, false),
        bone("l_hand", 12, -0.18, 0, 0, true, false, true),
        bone("r_upper_arm", 2, 0.3, 0, 0, true, true, true),
        bone("r_forearm", 14, 0.27, 0, 0, false, true, false),
        bone("r_hand", 15, 0.18, 0, 0, true, false, true),
    };
    return s;
}

SkeletonSpec preset_fish() {
    SkeletonSpec s;
    s.name = "fish";
    s.bones.push_back(bone("root", -1, 0.1, 0, 0, true, true, true));
    for (int k = 1; k < 20; ++k) {
        // Tail segments bend in the horizontal plane only (yaw about z).
        s.bones.push_back(bone("tail" + std::to_string(k), k - 1, 0.08, 0, 0, true, false, false));
    }
    return s;
}

SkeletonSpec preset_mouse() {
    SkeletonSpec s;
    s.name = "mouse";
    s.bones = {
        bone("root", -1, 0.25, 0, 0, true, true, true),
        bone("spine1", 0, 0.22, 0, 0, true, true, false),
        bone("spine2", 1, 0.20, 0, 0, true, true, false),
        bone("spine3", 2, 0.18, 0, 0, true, true, false),
    };
    return s;
}

}  // namespace

SkeletonSpec make_preset(const std::string& name) {
    if (name == "human36") return preset_human36();
    if (name == "fish") return preset_fish();
    if (name == "mouse") return preset_mouse();
    throw UnknownPreset("unknown skeleton preset '" + name +
                        "' (available: human36, fish, mouse)");
}

std::string skeleton_to_json(const SkeletonSpec& skel) {
    nlohmann::json j;
    j["name"] = skel.name;
    j["bones"] = nlohmann::json::array();
    for (const Bone& b : skel.bones) {
        nlohmann::json jb;
        jb["name"] = b.name;
        jb["parent"] = b.parent;
        jb["offset"] = {b.offset.x(), b.offset.y(), b.offset.z()};
        jb["dof"] = {b.dof[0], b.dof[1], b.dof[2]};
        j["bones"].push_back(jb);
    }
    return j.dump(2);
}

SkeletonSpec skeleton_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("skeleton JSON: ") + e.what(), 1, int(e.byte));
    }
    SkeletonSpec s;
    for (auto& [key, value] : j.items()) {
        if (key != "name" && key != "bones") {
            throw ConfigError("skeleton JSON: unknown key '" + key + "'");
        }
    }
    s.name = j.value("name", "");
    if (!j.contains("bones") || !j["bones"].is_array()) {
        throw ConfigError("skeleton JSON: missing 'bones' array");
    }
    for (const auto& jb : j["bones"]) {
        for (auto& [key, value] : jb.items()) {
            if (key != "name" && key != "parent" && key != "offset" && key != "dof") {
                throw ConfigError("skeleton JSON: unknown bone key '" + key + "'");
            }
        }
        Bone b;
        b.name = jb.value("name", "");
        if (!jb.contains("parent") || !jb.contains("offset") || !jb.contains("dof")) {
            throw ConfigError("skeleton JSON: bone requires 'parent', 'offset', 'dof'");
        }
        b.parent = jb["parent"].get<int>();
        auto off = jb["offset"];
        auto dof = jb["dof"];
        if (!off.is_array() || off.size() != 3 || !dof.is_array() || dof.size() != 3) {
            throw ConfigError("skeleton JSON: 'offset' and 'dof' must have 3 entries");
        }
        b.offset = Eigen::Vector3d(off[0].get<double>(), off[1].get<double>(), off[2].get<double>());
        b.dof = {dof[0].get<bool>(), dof[1].get<bool>(), dof[2].get<bool>()};
        s.bones.push_back(b);
    }
    s.validate();
    return s;
}

SkeletonSpec load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open skeleton file: " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return skeleton_from_json(buf.str());
}

void save_skeleton(const SkeletonSpec& skel, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write skeleton file: " + path);
    }
    out << skeleton_to_json(skel) << "\n";
}

}  // namespace kinemotion
