#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "kinemotion/ahmr.hpp"
#include "kinemotion/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as little-endian doubles");

namespace kinemotion {

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json hyper_to_json(const HyperParams& h) {
    return {{"hidden", h.hidden},
            {"recurrent_steps", h.recurrent_steps},
            {"context_window", h.context_window},
            {"input_frames", h.input_frames},
            {"output_frames", h.output_frames},
            {"representation", to_string(h.rep)}};
}

HyperParams hyper_from_json(const nlohmann::json& j) {
    HyperParams h;
    h.hidden = j.at("hidden").get<int>();
    h.recurrent_steps = j.at("recurrent_steps").get<int>();
    h.context_window = j.at("context_window").get<int>();
    h.input_frames = j.at("input_frames").get<int>();
    h.output_frames = j.at("output_frames").get<int>();
    h.rep = representation_from_string(j.at("representation").get<std::string>());
    return h;
}

}  // namespace

void save_checkpoint(const std::string& path, const AhmrModel& model) {
    nlohmann::json header;
    header["version"] = kCheckpointVersion;
    header["hyper"] = hyper_to_json(model.hyper());
    header["skeleton"] = nlohmann::json::parse(skeleton_to_json(model.skeleton()));
    header["tensors"] = nlohmann::json::array();
    for (const TensorInfo& ti : model.params().manifest()) {
        header["tensors"].push_back(
            {{"name", ti.name}, {"offset", ti.offset}, {"rows", ti.rows}, {"cols", ti.cols}});
    }
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path);
    std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    const Eigen::VectorXd& flat = model.params().flat();
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(sizeof(double) * flat.size()));
    if (!out) throw Error("short write while saving checkpoint: " + path);
}

AhmrModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen == 0 || hlen > (1u << 24)) {
        throw Error("checkpoint header is corrupt: " + path);
    }
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw Error("checkpoint header is truncated: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    if (header.at("version").get<int>() != kCheckpointVersion) {
        throw Error("unsupported checkpoint version");
    }
    HyperParams hyper = hyper_from_json(header.at("hyper"));
    SkeletonSpec skel = skeleton_from_json(header.at("skeleton").dump());

    AhmrModel model(skel, hyper);
    const auto& manifest = model.params().manifest();
    const auto& jt = header.at("tensors");
    if (jt.size() != manifest.size()) {
        throw Error("checkpoint tensor manifest does not match the model layout");
    }
    for (size_t i = 0; i < manifest.size(); ++i) {
        if (jt[i].at("name").get<std::string>() != manifest[i].name ||
            jt[i].at("offset").get<int>() != manifest[i].offset ||
            jt[i].at("rows").get<int>() != manifest[i].rows ||
            jt[i].at("cols").get<int>() != manifest[i].cols) {
            throw Error("checkpoint tensor '" + manifest[i].name + "' does not match the model");
        }
    }
    Eigen::VectorXd& flat = model.params().flat();
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(sizeof(double) * flat.size()));
    if (!in || in.gcount() != static_cast<std::streamsize>(sizeof(double) * flat.size())) {
        throw Error("checkpoint payload is truncated: " + path);
    }
    return model;
}

}  // namespace kinemotion
