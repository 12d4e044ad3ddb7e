#include "trajflow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "trajflow/errors.hpp"
#include "trajflow/hash.hpp"

namespace trajflow {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'A', 'J', 'F', 'L', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { byte(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const void* data, std::size_t len) {
        const auto* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + len);
    }
    const std::vector<char>& data() const { return buf_; }

private:
    void byte(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::vector<char>& buf, const std::string& path) : buf_(buf), path_(path) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t len) {
        need(len);
        std::string s(buf_.data() + pos_, len);
        pos_ += len;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    void need(std::size_t n) {
        if (pos_ + n > buf_.size()) {
            throw SchemaError("checkpoint: " + path_ + " is truncated");
        }
    }

    const std::vector<char>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint_blob(const std::string& path, const CheckpointBlob& blob) {
    Writer w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u64(blob.meta_json.size());
    w.bytes(blob.meta_json.data(), blob.meta_json.size());
    w.u32(static_cast<std::uint32_t>(blob.blobs.size()));
    for (const auto& [name, value] : blob.blobs.entries()) {
        if (name.size() > 0xffff) throw UsageError("checkpoint: blob name too long");
        w.u16(static_cast<std::uint16_t>(name.size()));
        w.bytes(name.data(), name.size());
        w.u8(static_cast<std::uint8_t>(value.ndim()));
        for (std::size_t d : value.shape()) w.u64(d);
        for (std::size_t i = 0; i < value.size(); ++i) w.f64(value[i]);
    }
    Fnv1a64 hash;
    hash.update(w.data().data(), w.data().size());
    w.u64(hash.digest());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write " + path);
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw IoError("checkpoint: failed writing " + path);
}

CheckpointBlob load_checkpoint_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path);
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof(kMagic) + 4 + 8 + 4 + 8) {
        throw SchemaError("checkpoint: " + path + " is too small");
    }
    Fnv1a64 hash;
    hash.update(buf.data(), buf.size() - 8);

    Reader r(buf, path);
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw SchemaError("checkpoint: " + path + " has the wrong magic");
    }
    r.str(sizeof(kMagic));
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw SchemaError("checkpoint: " + path + " has unsupported version " +
                          std::to_string(version));
    }

    CheckpointBlob blob;
    blob.meta_json = r.str(r.u64());
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.str(r.u16());
        const std::uint8_t ndim = r.u8();
        std::vector<std::size_t> shape(ndim);
        std::size_t total = 1;
        for (auto& d : shape) {
            d = r.u64();
            total *= d;
        }
        std::vector<double> data(total);
        for (double& v : data) v = r.f64();
        blob.blobs.add(name, Array(std::move(shape), std::move(data)));
    }
    if (r.remaining() != 8) {
        throw SchemaError("checkpoint: " + path + " has trailing bytes");
    }
    const std::uint64_t stored = r.u64();
    if (stored != hash.digest()) {
        throw DataError("checkpoint: " + path + " checksum mismatch (corrupted file)");
    }
    return blob;
}

nlohmann::json net_config_to_json(const NetConfig& cfg) {
    return nlohmann::json{
        {"horizon", cfg.horizon},
        {"state_dim", cfg.state_dim},
        {"context_dim", cfg.context_dim},
        {"base_channels", cfg.base_channels},
        {"depth", cfg.depth},
        {"kernel_size", cfg.kernel_size},
        {"time_embed_dim", cfg.time_embed_dim},
        {"groups", cfg.groups},
    };
}

NetConfig net_config_from_json(const nlohmann::json& j) {
    NetConfig cfg;
    cfg.horizon = j.at("horizon").get<int>();
    cfg.state_dim = j.at("state_dim").get<int>();
    cfg.context_dim = j.at("context_dim").get<int>();
    cfg.base_channels = j.at("base_channels").get<int>();
    cfg.depth = j.at("depth").get<int>();
    cfg.kernel_size = j.at("kernel_size").get<int>();
    cfg.time_embed_dim = j.at("time_embed_dim").get<int>();
    cfg.groups = j.at("groups").get<int>();
    cfg.validate();
    return cfg;
}

void save_model_checkpoint(const std::string& path, const ModelCheckpoint& ckpt) {
    nlohmann::json meta{
        {"kind", "model"},
        {"family", to_string(ckpt.model.family)},
        {"net", net_config_to_json(ckpt.model.net.config())},
        {"stats", ckpt.stats.to_json()},
        {"layout", ckpt.layout.to_json()},
        {"trained_steps", ckpt.trained_steps},
        {"diffusion_timesteps", ckpt.model.schedule.timesteps},
        {"run_config", ckpt.run_config},
    };

    CheckpointBlob blob;
    blob.meta_json = meta.dump();
    for (const auto& [name, value] : ckpt.model.net.params().entries()) {
        blob.blobs.add("model." + name, value);
    }
    for (const auto& [name, value] : ckpt.opt.m.entries()) blob.blobs.add("adam.m." + name, value);
    for (const auto& [name, value] : ckpt.opt.v.entries()) blob.blobs.add("adam.v." + name, value);
    save_checkpoint_blob(path, blob);
}

ModelCheckpoint load_model_checkpoint(const std::string& path) {
    CheckpointBlob blob = load_checkpoint_blob(path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(blob.meta_json);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint: " + path + " has invalid metadata: " + e.what());
    }
    try {
        if (meta.at("kind").get<std::string>() != "model") {
            throw SchemaError("checkpoint: " + path + " is not a model checkpoint");
        }
        ModelCheckpoint ckpt;
        ckpt.model.family = family_from_string(meta.at("family").get<std::string>());
        const NetConfig cfg = net_config_from_json(meta.at("net"));
        ckpt.stats = NormStats::from_json(meta.at("stats"));
        ckpt.layout = ContextLayout::from_json(meta.at("layout"));
        ckpt.trained_steps = meta.at("trained_steps").get<std::int64_t>();
        ckpt.model.schedule = DiffusionSchedule::cosine(meta.at("diffusion_timesteps").get<int>());
        ckpt.run_config = meta.value("run_config", nlohmann::json());

        ParamSet params, m, v;
        for (const auto& [name, value] : blob.blobs.entries()) {
            if (name.starts_with("model.")) {
                params.add(name.substr(6), value);
            } else if (name.starts_with("adam.m.")) {
                m.add(name.substr(7), value);
            } else if (name.starts_with("adam.v.")) {
                v.add(name.substr(7), value);
            } else {
                throw SchemaError("checkpoint: unexpected blob " + name);
            }
        }
        ckpt.model.net = VectorFieldNet(cfg, std::move(params));
        ckpt.opt.m = std::move(m);
        ckpt.opt.v = std::move(v);
        ckpt.opt.step = ckpt.trained_steps;
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint: " + path + " metadata is incomplete: " + e.what());
    }
}

}  // namespace trajflow
