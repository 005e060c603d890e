// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_IO_HPP
#define IRSBF_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "irsbf/admm.hpp"
#include "irsbf/channel.hpp"
#include "irsbf/secrecy.hpp"
#include "irsbf/types.hpp"

namespace irsbf::io {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Text fixture blocks:
///   matrix <name> <rows> <cols>   then one line per row of re,im pairs
///   vector <name> <n>             then one line of n reals
///   scalar <name> <value>
struct Fixture {
    std::map<std::string, CMat> matrices;
    std::map<std::string, std::vector<double>> vectors;
    std::map<std::string, double> scalars;

    const CMat& matrix(const std::string& name) const {
        auto it = matrices.find(name);
        if (it == matrices.end()) throw InputError("fixture: missing matrix " + name);
        return it->second;
    }
    double scalar(const std::string& name) const {
        auto it = scalars.find(name);
        if (it == scalars.end()) throw InputError("fixture: missing scalar " + name);
        return it->second;
    }
};

inline void write_matrix(std::ostream& os, const std::string& name, const CMat& m) {
    os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
        }
        os << '\n';
    }
}

inline void write_vector(std::ostream& os, const std::string& name, const std::vector<double>& v) {
    os << "vector " << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_double(v[i]);
    os << '\n';
}

inline void write_scalar(std::ostream& os, const std::string& name, double v) {
    os << "scalar " << name << ' ' << format_double(v) << '\n';
}

namespace detail {

inline std::vector<double> parse_reals(const std::string& line, std::size_t expected, const std::string& what) {
    std::vector<double> out;
    out.reserve(expected);
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InputError("fixture: bad number in " + what);
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw InputError("fixture: bad number in " + what);
        out.push_back(v);
    }
    if (out.size() != expected) throw InputError("fixture: wrong entry count in " + what);
    return out;
}

}  // namespace detail

inline Fixture read_fixture(std::istream& is) {
    Fixture fx;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream head(line);
        std::string kind, name;
        head >> kind >> name;
        if (kind == "matrix") {
            long rows = -1, cols = -1;
            head >> rows >> cols;
            if (!head || rows < 0 || cols < 0) throw InputError("fixture: bad matrix header: " + line);
            CMat m(rows, cols);
            for (long i = 0; i < rows; ++i) {
                if (!std::getline(is, line)) throw InputError("fixture: truncated matrix " + name);
                auto vals = detail::parse_reals(line, static_cast<std::size_t>(2 * cols), name);
                for (long j = 0; j < cols; ++j) m(i, j) = cplx(vals[2 * j], vals[2 * j + 1]);
            }
            fx.matrices[name] = std::move(m);
        } else if (kind == "vector") {
            long n = -1;
            head >> n;
            if (!head || n < 0) throw InputError("fixture: bad vector header: " + line);
            if (!std::getline(is, line)) throw InputError("fixture: truncated vector " + name);
            fx.vectors[name] = n == 0 ? std::vector<double>{} : detail::parse_reals(line, n, name);
        } else if (kind == "scalar") {
            double v = 0.0;
            head >> v;
            if (!head) throw InputError("fixture: bad scalar: " + line);
            fx.scalars[name] = v;
        } else {
            throw InputError("fixture: unknown block kind '" + kind + "'");
        }
    }
    return fx;
}

inline void write_channel_set(std::ostream& os, const ChannelSet& set) {
    write_matrix(os, "h_ab", set.h_ab);
    write_matrix(os, "h_ae", set.h_ae);
    write_matrix(os, "h_ai", set.h_ai);
    write_matrix(os, "h_ib", set.h_ib);
    write_matrix(os, "h_ie", set.h_ie);
    write_scalar(os, "noise_power", set.noise_power);
    write_vector(os, "alice_aods", set.alice_aods);
}

inline ChannelSet channel_set_from(const Fixture& fx) {
    ChannelSet set;
    set.h_ab = fx.matrix("h_ab");
    set.h_ae = fx.matrix("h_ae");
    set.h_ai = fx.matrix("h_ai");
    set.h_ib = fx.matrix("h_ib");
    set.h_ie = fx.matrix("h_ie");
    set.noise_power = fx.scalar("noise_power");
    if (auto it = fx.vectors.find("alice_aods"); it != fx.vectors.end()) set.alice_aods = it->second;
    set.validate();
    return set;
}

inline ChannelSet read_channel_set(std::istream& is) { return channel_set_from(read_fixture(is)); }

inline void write_beamformer(std::ostream& os, const HybridBeamformer& bf) {
    write_matrix(os, "f_analog", bf.f_analog);
    write_matrix(os, "w_s", bf.w_s);
    write_matrix(os, "w_z", bf.w_z);
    write_scalar(os, "p_max", bf.p_max);
    write_scalar(os, "full_digital", bf.full_digital ? 1.0 : 0.0);
}

inline HybridBeamformer beamformer_from(const Fixture& fx) {
    HybridBeamformer bf{fx.matrix("f_analog"), fx.matrix("w_s"), fx.matrix("w_z"), fx.scalar("p_max"),
                        fx.scalar("full_digital") != 0.0};
    bf.validate();
    return bf;
}

inline const char* kTraceHeader = "iter,residual,lagrangian,objective,ms";

inline void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
    os << kTraceHeader << '\n';
    for (const auto& r : trace)
        os << r.iter << ',' << format_double(r.residual) << ',' << format_double(r.lagrangian) << ','
           << format_double(r.objective) << ',' << format_double(r.ms) << '\n';
}

/// Writes via a sibling temp file and a rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw InputError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace irsbf::io

#endif  // IRSBF_IO_HPP
