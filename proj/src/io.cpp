#include "mvsde/io.hpp"

#include "mvsde/errors.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mvsde {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string render_table(const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows,
                         const char* sep, const char* header_prefix) {
    std::ostringstream out;
    out << header_prefix;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out << sep;
        out << columns[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw InvalidInputError("render table: row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << sep;
            out << format_double(row[c]);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

std::string render_csv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows) {
    return render_table(columns, rows, ",", "");
}

std::string render_gnuplot(const std::vector<std::string>& columns,
                           const std::vector<std::vector<double>>& rows) {
    return render_table(columns, rows, " ", "# ");
}

std::string paths_to_csv(const ParticlePaths& paths) {
    std::ostringstream out;
    out << "particle,node,time";
    for (int c = 0; c < paths.dim(); ++c) out << ",x" << c;
    out << '\n';
    for (long p = 0; p < paths.particles(); ++p) {
        for (long k = 0; k <= paths.grid().n; ++k) {
            out << p << ',' << k << ',' << format_double(paths.grid().node(k));
            auto x = paths.state(p, k);
            for (double v : x) out << ',' << format_double(v);
            out << '\n';
        }
    }
    return out.str();
}

std::string flow_to_csv(const MeasureFlow& flow) {
    std::ostringstream out;
    const int d = flow.at(0).dim();
    out << "node,time,atom";
    for (int c = 0; c < d; ++c) out << ",x" << c;
    out << '\n';
    for (long k = 0; k < flow.node_count(); ++k) {
        const EmpiricalMeasure& mu = flow.at(k);
        for (long a = 0; a < mu.size(); ++a) {
            out << k << ',' << format_double(flow.grid().node(k)) << ',' << a;
            for (double v : mu.atom(a)) out << ',' << format_double(v);
            out << '\n';
        }
    }
    return out.str();
}

std::string limit_field_to_csv(const MalliavinLimitField& field) {
    std::ostringstream out;
    out << "source_node,node,time,component,value\n";
    const int dm = field.dim_state() * field.dim_noise();
    for (long k = 0; k <= field.grid().n; ++k) {
        auto v = field.value_at(k);
        for (int c = 0; c < dm; ++c) {
            out << field.source_index() << ',' << k << ',' << format_double(field.grid().node(k))
                << ',' << c << ',' << format_double(v[static_cast<std::size_t>(c)]) << '\n';
        }
    }
    return out.str();
}

std::string ips_field_to_csv(const MalliavinIpsField& field) {
    std::ostringstream out;
    out << "source_particle,source_node,particle,node,time,component,value\n";
    const int dm = field.dim_state() * field.dim_noise();
    for (long i = 0; i < field.particles(); ++i) {
        for (long k = 0; k <= field.grid().n; ++k) {
            auto v = field.value_at(i, k);
            for (int c = 0; c < dm; ++c) {
                out << field.source_particle() << ',' << field.source_index() << ',' << i << ','
                    << k << ',' << format_double(field.grid().node(k)) << ',' << c << ','
                    << format_double(v[static_cast<std::size_t>(c)]) << '\n';
            }
        }
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

} // namespace mvsde
