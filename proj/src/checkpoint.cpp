#include "ambient/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ambient/errors.hpp"

namespace ambient::gan {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'A', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void append_u32(std::string& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.append(b, 4);
}

void append_u64(std::string& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.append(b, 8);
}

void append_f64_array(std::string& out, const std::vector<double>& v) {
    // Little-endian host assumption is checked once at write time.
    static_assert(sizeof(double) == 8);
    out.append(reinterpret_cast<const char*>(v.data()), v.size() * 8);
}

std::uint64_t read_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}

struct BlobSet {
    std::vector<std::pair<std::string, const std::vector<double>*>> blobs;

    void add(const std::string& name, const std::vector<double>& data) {
        blobs.emplace_back(name, &data);
    }
};

BlobSet collect_blobs(const TrainState& st) {
    BlobSet bs;
    for (auto& p : st.gen->params()) bs.add(p.name, p.value->v);
    for (auto& p : st.disc->params()) bs.add(p.name, p.value->v);
    auto add_moments = [&bs](const nn::AdamState& a, const std::string& tag) {
        for (std::size_t i = 0; i < a.m.size(); ++i) {
            bs.add(tag + ".m" + std::to_string(i), a.m[i]);
            bs.add(tag + ".v" + std::to_string(i), a.v[i]);
        }
    };
    add_moments(st.opt_g, "adam_g");
    add_moments(st.opt_d, "adam_d");
    return bs;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& st) {
    const BlobSet bs = collect_blobs(st);

    json header;
    header["iter"] = st.iter;
    header["config"] = to_json(st.cfg);
    header["ema"] = {{"loss_d", st.avg_loss_d},
                     {"loss_g_adv", st.avg_loss_g_adv},
                     {"loss_l1", st.avg_loss_l1}};
    header["adam_t"] = {{"gen", st.opt_g.t}, {"disc", st.opt_d.t}};
    header["rng"] = {{"seed", st.cfg.seed}, {"scheme", "per-iteration derived streams"}};
    json blob_dir = json::array();
    for (const auto& [name, data] : bs.blobs)
        blob_dir.push_back({{"name", name}, {"size", data->size()}});
    header["blobs"] = blob_dir;

    const std::string hdr = header.dump();
    std::string out;
    out.append(kMagic, 4);
    append_u32(out, kVersion);
    append_u64(out, hdr.size());
    out += hdr;
    for (const auto& [name, data] : bs.blobs) append_f64_array(out, *data);

    // Atomic publish: write sidecar then rename.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("save_checkpoint: cannot open " + tmp);
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw IoError("save_checkpoint: write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("save_checkpoint: rename failed: " + path.string() + ": " + ec.message());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("load_checkpoint: cannot open " + path.string());
    const auto size = static_cast<std::size_t>(f.tellg());
    f.seekg(0);
    std::string bytes(size, '\0');
    f.read(bytes.data(), static_cast<std::streamsize>(size));
    if (!f) throw IoError("load_checkpoint: read failed: " + path.string());

    if (size < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("load_checkpoint: not a checkpoint file: " + path.string());
    std::uint32_t version = 0;
    for (int i = 3; i >= 0; --i)
        version = (version << 8) | static_cast<unsigned char>(bytes[4 + i]);
    if (version != kVersion) throw ConfigError("load_checkpoint: unsupported version");
    const std::uint64_t hdr_len = read_u64(bytes.data() + 8);
    if (16 + hdr_len > size) throw IoError("load_checkpoint: truncated header");

    json header;
    try {
        header = json::parse(bytes.substr(16, hdr_len));
    } catch (const json::exception& e) {
        throw IoError("load_checkpoint: bad header JSON: " + std::string(e.what()));
    }

    TrainState st = init_state(train_config_from_json(header.at("config")));
    st.iter = header.at("iter").get<long>();
    st.avg_loss_d = header.at("ema").at("loss_d").get<double>();
    st.avg_loss_g_adv = header.at("ema").at("loss_g_adv").get<double>();
    st.avg_loss_l1 = header.at("ema").at("loss_l1").get<double>();
    st.opt_g.t = header.at("adam_t").at("gen").get<long>();
    st.opt_d.t = header.at("adam_t").at("disc").get<long>();

    // Rehydrate blobs in directory order.
    std::vector<std::pair<std::string, std::vector<double>*>> slots;
    for (auto& p : st.gen->params()) slots.emplace_back(p.name, &p.value->v);
    for (auto& p : st.disc->params()) slots.emplace_back(p.name, &p.value->v);
    auto add_moments = [&slots](nn::AdamState& a, const std::string& tag) {
        for (std::size_t i = 0; i < a.m.size(); ++i) {
            slots.emplace_back(tag + ".m" + std::to_string(i), &a.m[i]);
            slots.emplace_back(tag + ".v" + std::to_string(i), &a.v[i]);
        }
    };
    add_moments(st.opt_g, "adam_g");
    add_moments(st.opt_d, "adam_d");

    const json& blob_dir = header.at("blobs");
    if (blob_dir.size() != slots.size())
        throw ConfigError("load_checkpoint: blob directory does not match architecture");
    std::size_t offset = 16 + hdr_len;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string name = blob_dir[i].at("name").get<std::string>();
        const std::size_t n = blob_dir[i].at("size").get<std::size_t>();
        if (name != slots[i].first || n != slots[i].second->size())
            throw ConfigError("load_checkpoint: blob mismatch at '" + name + "'");
        if (offset + n * 8 > size) throw IoError("load_checkpoint: truncated blob data");
        std::memcpy(slots[i].second->data(), bytes.data() + offset, n * 8);
        offset += n * 8;
    }
    if (offset != size) throw IoError("load_checkpoint: trailing bytes");
    return st;
}

}  // namespace ambient::gan
