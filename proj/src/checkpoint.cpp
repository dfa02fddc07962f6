#include "dacer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dacer/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as native doubles and documented "
              "little-endian; big-endian hosts would need byte swaps");

namespace dacer {

bool Checkpoint::has_meta(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return true;
    return false;
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    throw LoadError("checkpoint: missing meta key '" + key + "'");
}

void Checkpoint::load_into(const std::string& name, Tensor& dst) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw LoadError("checkpoint: missing tensor '" + name + "'");
    const Entry& e = it->second;
    if (e.shape != dst.shape)
        throw LoadError("checkpoint: tensor '" + name + "' shape mismatch (file " +
                        Tensor(e.shape).shape_str() + ", wanted " + dst.shape_str() + ")");
    *dst.data = e.values;
}

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& meta,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw LoadError("checkpoint: cannot open '" + path + "' for writing");
    f << "DACER-CKPT 1\n";
    for (const auto& [k, v] : meta) {
        if (k.find_first_of(" \n") != std::string::npos)
            throw ContractError("checkpoint: meta key may not contain spaces: '" + k + "'");
        if (v.find('\n') != std::string::npos)
            throw ContractError("checkpoint: meta value may not contain newlines");
        f << "meta " << k << ' ' << v << '\n';
    }
    for (const auto& [name, t] : tensors) {
        if (name.find_first_of(" \n") != std::string::npos)
            throw ContractError("checkpoint: tensor name may not contain spaces: '" + name + "'");
        f << "tensor " << name;
        for (int d : t->shape) f << ' ' << d;
        f << '\n';
    }
    f << "end\n";
    for (const auto& [name, t] : tensors)
        f.write(reinterpret_cast<const char*>(t->data->data()),
                static_cast<std::streamsize>(t->data->size() * sizeof(double)));
    if (!f) throw LoadError("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw LoadError("checkpoint: cannot open '" + path + "'");

    Checkpoint ck;
    std::string line;
    if (!std::getline(f, line) || line != "DACER-CKPT 1")
        throw LoadError("checkpoint: '" + path + "' has no DACER-CKPT 1 header");

    bool saw_end = false;
    while (std::getline(f, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream is(line);
        std::string kind;
        is >> kind;
        if (kind == "meta") {
            std::string key;
            is >> key;
            if (key.empty()) throw LoadError("checkpoint: malformed meta line '" + line + "'");
            std::string value;
            std::getline(is, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            ck.meta.emplace_back(key, value);
        } else if (kind == "tensor") {
            std::string name;
            is >> name;
            std::vector<int> shape;
            int d;
            while (is >> d) shape.push_back(d);
            if (name.empty() || shape.empty() || shape.size() > 2)
                throw LoadError("checkpoint: malformed tensor line '" + line + "'");
            if (ck.tensors.count(name))
                throw LoadError("checkpoint: duplicate tensor '" + name + "'");
            Checkpoint::Entry e;
            e.shape = shape;
            ck.tensor_order.push_back(name);
            ck.tensors.emplace(name, std::move(e));
        } else {
            throw LoadError("checkpoint: unexpected header line '" + line + "'");
        }
    }
    if (!saw_end) throw LoadError("checkpoint: header not terminated by 'end'");

    for (const std::string& name : ck.tensor_order) {
        Checkpoint::Entry& e = ck.tensors.at(name);
        size_t n = 1;
        for (int d : e.shape) {
            if (d <= 0) throw LoadError("checkpoint: tensor '" + name + "' has bad shape");
            n *= static_cast<size_t>(d);
        }
        e.values.resize(n);
        f.read(reinterpret_cast<char*>(e.values.data()),
               static_cast<std::streamsize>(n * sizeof(double)));
        if (f.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
            throw LoadError("checkpoint: truncated payload at tensor '" + name + "'");
    }
    return ck;
}

} // namespace dacer
