#include "prog/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prog::diff {

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "progckpt v1\n";
    out << "params " << params.count() << "\n";
    char hex[17];
    for (std::size_t p = 0; p < params.count(); ++p) {
        const int slot = static_cast<int>(p);
        const Tensor& t = params[slot];
        out << params.name(slot) << " " << t.shape().size();
        for (auto d : t.shape()) out << " " << d;
        if (params.l2_exempt(slot)) out << " exempt";
        out << "\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(t[i])));
            out << hex << (i + 1 == t.size() ? '\n' : ' ');
        }
        if (t.size() == 0) out << "\n";
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "progckpt" || version != "v1")
        throw std::runtime_error("not a progckpt v1 file: " + path);
    std::string key;
    std::size_t count = 0;
    in >> key >> count;
    if (key != "params") throw std::runtime_error("malformed checkpoint header: " + path);

    ModelParams params;
    for (std::size_t p = 0; p < count; ++p) {
        std::string name;
        std::size_t rank = 0;
        if (!(in >> name >> rank)) throw std::runtime_error("truncated checkpoint: " + path);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) in >> d;
        // optional "exempt" marker sits before the hex payload; a hex word
        // is always 16 chars, so the 6-char marker cannot be mistaken
        bool exempt = false;
        std::string word;
        Tensor t(shape);
        std::size_t i = 0;
        if (t.size() > 0) {
            if (!(in >> word)) throw std::runtime_error("truncated checkpoint: " + path);
            if (word == "exempt") {
                exempt = true;
            } else {
                t[i++] = std::bit_cast<double>(
                    static_cast<std::uint64_t>(std::stoull(word, nullptr, 16)));
            }
        }
        for (; i < t.size(); ++i) {
            if (!(in >> word)) throw std::runtime_error("truncated checkpoint: " + path);
            t[i] = std::bit_cast<double>(
                static_cast<std::uint64_t>(std::stoull(word, nullptr, 16)));
        }
        params.add(name, std::move(t), exempt);
    }
    return params;
}

}  // namespace prog::diff
