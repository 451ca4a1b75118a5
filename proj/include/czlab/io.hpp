#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "czlab/errors.hpp"
#include "czlab/grid.hpp"

namespace czlab {

using nlohmann::json;

/// Run-length encode a 0/1 mask: [len0, len1, len0, ...] starting with zeros.
inline std::vector<std::int64_t> runLengths(const std::vector<std::uint8_t>& mask) {
    std::vector<std::int64_t> runs;
    std::uint8_t cur = 0;
    std::int64_t len = 0;
    for (std::uint8_t v : mask) {
        std::uint8_t bit = v ? 1 : 0;
        if (bit == cur) {
            ++len;
        } else {
            runs.push_back(len);
            cur = bit;
            len = 1;
        }
    }
    runs.push_back(len);
    return runs;
}

inline std::vector<std::uint8_t> fromRunLengths(const std::vector<std::int64_t>& runs,
                                                std::int64_t total) {
    std::vector<std::uint8_t> mask;
    mask.reserve(total);
    std::uint8_t cur = 0;
    for (std::int64_t len : runs) {
        for (std::int64_t i = 0; i < len; ++i) mask.push_back(cur);
        cur ^= 1;
    }
    if (static_cast<std::int64_t>(mask.size()) != total)
        throw Error("fromRunLengths: length mismatch");
    return mask;
}

inline json gridHeader(const GridFunction& f) {
    bool complex = !f.isReal();
    json box = json::array();
    for (int k = 0; k < f.grid.dim; ++k)
        box.push_back({f.grid.origin[k], f.grid.origin[k] + f.grid.side});
    return json{{"d", f.grid.dim},
                {"n", f.grid.n},
                {"box", box},
                {"complex", complex},
                {"support", runLengths(f.support)}};
}

/// Writes <path>.json (header) and <path>.bin (row-major 64-bit floats,
/// interleaved re/im when complex).
inline void saveGridFunction(const GridFunction& f, const std::string& path) {
    json header = gridHeader(f);
    {
        std::ofstream out(path + ".json");
        if (!out) throw Error("saveGridFunction: cannot open " + path + ".json");
        out << header.dump(2) << "\n";
    }
    std::ofstream bin(path + ".bin", std::ios::binary);
    if (!bin) throw Error("saveGridFunction: cannot open " + path + ".bin");
    bool complex = header["complex"].get<bool>();
    for (const Complex& v : f.values) {
        double re = v.real();
        bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
        if (complex) {
            double im = v.imag();
            bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    }
}

inline GridFunction loadGridFunction(const std::string& path) {
    json header;
    {
        std::ifstream in(path + ".json");
        if (!in) throw Error("loadGridFunction: cannot open " + path + ".json");
        in >> header;
    }
    int d = header["d"].get<int>();
    std::int64_t n = header["n"].get<std::int64_t>();
    auto box = header["box"];
    Point origin{0, 0, 0};
    double side = box[0][1].get<double>() - box[0][0].get<double>();
    for (int k = 0; k < d; ++k) origin[k] = box[k][0].get<double>();
    Grid g(d, origin, side, n);
    GridFunction f(g);
    bool complex = header["complex"].get<bool>();
    std::ifstream bin(path + ".bin", std::ios::binary);
    if (!bin) throw Error("loadGridFunction: cannot open " + path + ".bin");
    for (Complex& v : f.values) {
        double re = 0, im = 0;
        bin.read(reinterpret_cast<char*>(&re), sizeof(double));
        if (complex) bin.read(reinterpret_cast<char*>(&im), sizeof(double));
        v = Complex(re, im);
    }
    if (!bin) throw Error("loadGridFunction: binary payload truncated");
    f.support = fromRunLengths(header["support"].get<std::vector<std::int64_t>>(),
                               g.totalCells());
    return f;
}

} // namespace czlab
