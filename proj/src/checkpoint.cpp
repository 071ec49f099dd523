#include "gait/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gait/serialize.hpp"

namespace gait {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "gaittake-checkpoint 1";

struct Entry {
    std::string name;
    Tensor tensor;
};

std::vector<Entry> entries_of(const TrainState& s) {
    std::vector<Entry> out;
    for (auto& [name, t] : s.params.named()) out.push_back({name, t});
    const auto trainable = s.params.trainable();
    for (std::size_t k = 0; k < trainable.size(); ++k) out.push_back({"adam.m." + trainable[k].first, s.adam_m[k]});
    for (std::size_t k = 0; k < trainable.size(); ++k) out.push_back({"adam.v." + trainable[k].first, s.adam_v[k]});
    return out;
}

std::string shape_token(const Shape& s) {
    if (s.empty()) return "scalar";
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

void checkpoint_save(const TrainState& state, const fs::path& dir) {
    fs::create_directories(dir);
    std::ostringstream bin(std::ios::binary);
    std::ostringstream manifest;
    manifest << kMagic << '\n' << "step " << state.step << '\n' << "rng " << state.rng.state() << '\n';
    std::uint64_t offset = 0;
    for (const auto& e : entries_of(state)) {
        write_tensor(bin, e.tensor);
        const std::uint64_t bytes = serialized_size(e.tensor.shape());
        manifest << "tensor " << e.name << ' ' << shape_token(e.tensor.shape()) << ' ' << offset << ' ' << bytes << '\n';
        offset += bytes;
    }
    write_file_atomic(dir / "state.bin", bin.str());
    write_file_atomic(dir / "manifest.txt", manifest.str());
}

TrainState checkpoint_load(const fs::path& dir, const ModelConfig& cfg) {
    std::ifstream mf(dir / "manifest.txt");
    if (!mf) throw std::runtime_error("checkpoint manifest missing in " + dir.string());
    std::string line;
    std::getline(mf, line);
    if (line != kMagic) throw std::runtime_error("not a checkpoint manifest: " + (dir / "manifest.txt").string());

    // Rebuild the expected layout from the configuration; seed is irrelevant
    // because every value is overwritten.
    TrainState state = init_train_state(cfg, 0);
    auto expected = entries_of(state);

    std::uint64_t step = 0;
    std::string rng_state;
    struct Listed {
        std::string name, shape;
        std::uint64_t offset = 0, bytes = 0;
    };
    std::vector<Listed> listed;
    while (std::getline(mf, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "step") {
            ls >> step;
        } else if (key == "rng") {
            std::getline(ls >> std::ws, rng_state);
        } else if (key == "tensor") {
            Listed l;
            ls >> l.name >> l.shape >> l.offset >> l.bytes;
            if (!ls) throw std::runtime_error("malformed checkpoint manifest line: " + line);
            listed.push_back(l);
        } else if (!key.empty()) {
            throw std::runtime_error("unknown checkpoint manifest entry: " + line);
        }
    }
    for (std::size_t i = 0; i < std::max(listed.size(), expected.size()); ++i) {
        if (i >= listed.size()) throw std::runtime_error("checkpoint lacks parameter " + expected[i].name);
        if (i >= expected.size()) throw std::runtime_error("checkpoint has unexpected entry " + listed[i].name);
        const std::string want_shape = shape_token(expected[i].tensor.shape());
        if (listed[i].name != expected[i].name || listed[i].shape != want_shape) {
            throw std::runtime_error("checkpoint entry " + std::to_string(i) + " is " + listed[i].name + " " +
                                     listed[i].shape + ", configuration expects " + expected[i].name + " " +
                                     want_shape);
        }
    }

    std::ifstream bin(dir / "state.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint data missing in " + dir.string());
    const std::uint64_t file_size = fs::file_size(dir / "state.bin");
    const std::uint64_t need = listed.empty() ? 0 : listed.back().offset + listed.back().bytes;
    if (file_size != need) {
        throw std::runtime_error("checkpoint data " + (dir / "state.bin").string() + " has " +
                                 std::to_string(file_size) + " bytes, manifest expects " + std::to_string(need));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        Tensor t = read_tensor(bin);
        if (t.shape() != expected[i].tensor.shape()) {
            throw std::runtime_error("checkpoint tensor " + expected[i].name + " has shape " + shape_str(t.shape()));
        }
        auto dst = expected[i].tensor.mutable_data();
        std::copy(t.data().begin(), t.data().end(), dst.begin());
    }
    state.step = step;
    state.rng.restore(rng_state);
    return state;
}

}  // namespace gait
