#include "spoutar/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spoutar/errors.hpp"

namespace spoutar {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_cell(const std::string& cell, int line_no, int col_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing chars");
        return v;
    } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "' at line " +
                         std::to_string(line_no) + ", column " +
                         std::to_string(col_no));
    }
}

Eigen::MatrixXd log_diff(const Eigen::MatrixXd& y,
                         const std::vector<std::string>& names) {
    const int p = static_cast<int>(y.rows());
    const int n = static_cast<int>(y.cols());
    if (n < 2)
        throw ValidationError("log-diff needs at least two time points");
    for (int i = 0; i < p; ++i)
        for (int t = 0; t < n; ++t)
            if (!(y(i, t) > 0.0))
                throw ValidationError(
                    "log-diff requires positive values: variable '" +
                    (i < static_cast<int>(names.size()) ? names[i]
                                                        : std::to_string(i)) +
                    "' at time index " + std::to_string(t));
    Eigen::MatrixXd out(p, n - 1);
    for (int i = 0; i < p; ++i)
        for (int t = 1; t < n; ++t)
            out(i, t - 1) = std::log(y(i, t)) - std::log(y(i, t - 1));
    return out;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                IngestSpec::Orientation orientation,
                                bool header,
                                std::vector<std::string>* names_out) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file: " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        rows.push_back(split_cells(line));
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw ParseError("ragged row at line " + std::to_string(line_no) +
                             ": expected " +
                             std::to_string(rows.front().size()) +
                             " cells, found " +
                             std::to_string(rows.back().size()));
    }
    if (rows.empty()) throw ParseError("empty input file: " + path);

    std::vector<std::string> names;
    std::size_t first_data_row = 0, first_data_col = 0;
    const bool rows_time =
        orientation == IngestSpec::Orientation::rows_are_time;
    if (header) {
        if (rows_time) {
            names = rows.front();
            first_data_row = 1;
        } else {
            for (const auto& r : rows) names.push_back(r.front());
            first_data_col = 1;
        }
    }
    const std::size_t nrows = rows.size() - first_data_row;
    const std::size_t ncols = rows.front().size() - first_data_col;
    if (nrows == 0 || ncols == 0) throw ParseError("no data cells in " + path);

    Eigen::MatrixXd raw(nrows, ncols);
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c)
            raw(r, c) =
                parse_cell(rows[r + first_data_row][c + first_data_col],
                           static_cast<int>(r + first_data_row + 1),
                           static_cast<int>(c + first_data_col + 1));

    Eigen::MatrixXd m = rows_time ? Eigen::MatrixXd(raw.transpose()) : raw;
    if (names_out) {
        if (names.empty())
            for (int i = 0; i < m.rows(); ++i)
                names.push_back("v" + std::to_string(i));
        *names_out = names;
    }
    return m;
}

PairedDataset ingest(const IngestSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw ParseError("cannot open input file: " + spec.path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        rows.push_back(split_cells(line));
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw ParseError("ragged row at line " + std::to_string(line_no));
    }
    if (rows.empty()) throw ParseError("empty input file: " + spec.path);

    const bool rows_time =
        spec.orientation == IngestSpec::Orientation::rows_are_time;
    const bool by_date = !spec.date_column.empty();
    if (by_date && !rows_time)
        throw ValidationError(
            "date-range splits need rows-are-time orientation");
    if (by_date && !spec.header)
        throw ValidationError("date-range splits need a header row");

    std::vector<std::string> names;
    std::vector<std::string> dates;
    Eigen::MatrixXd all;  // p x n

    if (rows_time) {
        std::size_t first_row = spec.header ? 1 : 0;
        std::size_t date_col = std::string::npos;
        std::vector<std::size_t> var_cols;
        if (spec.header) {
            const auto& head = rows.front();
            for (std::size_t c = 0; c < head.size(); ++c) {
                if (by_date && head[c] == spec.date_column) {
                    date_col = c;
                } else {
                    var_cols.push_back(c);
                    names.push_back(head[c]);
                }
            }
            if (by_date && date_col == std::string::npos)
                throw ValidationError("date column '" + spec.date_column +
                                      "' not found in header");
        } else {
            for (std::size_t c = 0; c < rows.front().size(); ++c) {
                var_cols.push_back(c);
                names.push_back("v" + std::to_string(c));
            }
        }
        const std::size_t n = rows.size() - first_row;
        all.resize(var_cols.size(), n);
        dates.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const auto& r = rows[t + first_row];
            if (date_col != std::string::npos) dates[t] = r[date_col];
            for (std::size_t v = 0; v < var_cols.size(); ++v)
                all(v, t) = parse_cell(r[var_cols[v]],
                                       static_cast<int>(t + first_row + 1),
                                       static_cast<int>(var_cols[v] + 1));
        }
    } else {
        const std::size_t first_col = spec.header ? 1 : 0;
        const std::size_t p = rows.size();
        const std::size_t n = rows.front().size() - first_col;
        all.resize(p, n);
        for (std::size_t i = 0; i < p; ++i) {
            names.push_back(spec.header ? rows[i][0]
                                        : "v" + std::to_string(i));
            for (std::size_t t = 0; t < n; ++t)
                all(i, t) = parse_cell(rows[i][t + first_col],
                                       static_cast<int>(i + 1),
                                       static_cast<int>(t + first_col + 1));
        }
    }

    PairedDataset ds;
    ds.names = names;
    if (by_date) {
        std::vector<int> idx1, idx2;
        for (std::size_t t = 0; t < dates.size(); ++t) {
            if (dates[t] >= spec.range1_start && dates[t] <= spec.range1_end)
                idx1.push_back(static_cast<int>(t));
            else if (dates[t] >= spec.range2_start &&
                     dates[t] <= spec.range2_end)
                idx2.push_back(static_cast<int>(t));
        }
        if (idx1.empty() || idx2.empty())
            throw ValidationError("date ranges select an empty period");
        ds.y1.resize(all.rows(), idx1.size());
        ds.y2.resize(all.rows(), idx2.size());
        for (std::size_t t = 0; t < idx1.size(); ++t)
            ds.y1.col(t) = all.col(idx1[t]);
        for (std::size_t t = 0; t < idx2.size(); ++t)
            ds.y2.col(t) = all.col(idx2[t]);
    } else if (spec.split_index > 0) {
        if (spec.split_index >= all.cols())
            throw ValidationError("split index " +
                                  std::to_string(spec.split_index) +
                                  " leaves no period-2 observations");
        ds.y1 = all.leftCols(spec.split_index);
        ds.y2 = all.rightCols(all.cols() - spec.split_index);
    } else {
        ds.y1 = all;  // single period
    }

    if (spec.preprocess == IngestSpec::Preprocess::log_diff) {
        ds.y1 = log_diff(ds.y1, names);
        if (ds.y2.size() > 0) ds.y2 = log_diff(ds.y2, names);
    }
    return ds;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    for (int i = 0; i < m.rows(); ++i) {
        out << (i < static_cast<int>(names.size()) ? names[i]
                                                   : "v" + std::to_string(i));
        for (int t = 0; t < m.cols(); ++t) out << ',' << fmt17(m(i, t));
        out << '\n';
    }
}

namespace {

constexpr char kDrawsMagic[8] = {'S', 'P', 'D', 'R', 'A', 'W', 'S', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t get_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
void put_doubles(std::ofstream& out, const double* ptr, std::size_t n) {
    out.write(reinterpret_cast<const char*>(ptr), n * sizeof(double));
}
void get_doubles(std::ifstream& in, double* ptr, std::size_t n) {
    in.read(reinterpret_cast<char*>(ptr), n * sizeof(double));
}

}  // namespace

void save_draws(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("cannot write " + path);
    out.write(kDrawsMagic, sizeof(kDrawsMagic));
    put_u32(out, static_cast<std::uint32_t>(draws.p));
    put_u32(out, static_cast<std::uint32_t>(draws.q));
    put_u32(out, static_cast<std::uint32_t>(draws.count()));
    put_u32(out, draws.single_period ? 1u : 0u);
    put_u32(out, static_cast<std::uint32_t>(draws.thinning));
    put_u32(out, static_cast<std::uint32_t>(draws.names.size()));
    for (const auto& name : draws.names) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    // Record layout: d[p], l1[m], l2[m], a[m], rho[p*q] with m = p(p-1)/2.
    for (int k = 0; k < draws.count(); ++k) {
        put_doubles(out, draws.d[k].data(), draws.d[k].size());
        put_doubles(out, draws.l1[k].data(), draws.l1[k].size());
        put_doubles(out, draws.l2[k].data(), draws.l2[k].size());
        put_doubles(out, draws.a[k].data(), draws.a[k].size());
        put_doubles(out, draws.rho[k].data(), draws.rho[k].size());
    }
    if (!out) throw RunError("short write to " + path);
}

PosteriorDraws load_draws(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open draws file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kDrawsMagic, sizeof(magic)) != 0)
        throw ParseError("not a draws container: " + path);

    PosteriorDraws d;
    d.p = static_cast<int>(get_u32(in));
    d.q = static_cast<int>(get_u32(in));
    const int count = static_cast<int>(get_u32(in));
    d.single_period = get_u32(in) != 0;
    d.thinning = static_cast<int>(get_u32(in));
    const int n_names = static_cast<int>(get_u32(in));
    for (int i = 0; i < n_names; ++i) {
        const auto len = get_u32(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        d.names.push_back(name);
    }
    const int m = d.p * (d.p - 1) / 2;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd dv(d.p), l1(m), l2(m), a(m);
        Eigen::MatrixXd rho(d.p, d.q);
        get_doubles(in, dv.data(), dv.size());
        get_doubles(in, l1.data(), l1.size());
        get_doubles(in, l2.data(), l2.size());
        get_doubles(in, a.data(), a.size());
        get_doubles(in, rho.data(), rho.size());
        if (!in) throw ParseError("truncated draws container: " + path);
        d.d.push_back(dv);
        d.l1.push_back(l1);
        d.l2.push_back(l2);
        d.a.push_back(a);
        d.rho.push_back(rho);
    }
    return d;
}

void export_draws_csv(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    const int m = draws.p * (draws.p - 1) / 2;
    out << "draw";
    for (int i = 0; i < draws.p; ++i) out << ",d" << i;
    for (int e = 0; e < m; ++e) out << ",l1_" << e;
    for (int e = 0; e < m; ++e) out << ",l2_" << e;
    for (int e = 0; e < m; ++e) out << ",a_" << e;
    for (int i = 0; i < draws.p; ++i)
        for (int k = 0; k < draws.q; ++k) out << ",rho_" << i << "_" << k;
    out << '\n';
    for (int k = 0; k < draws.count(); ++k) {
        out << k;
        for (int i = 0; i < draws.p; ++i) out << ',' << fmt17(draws.d[k][i]);
        for (int e = 0; e < m; ++e) out << ',' << fmt17(draws.l1[k][e]);
        for (int e = 0; e < m; ++e) out << ',' << fmt17(draws.l2[k][e]);
        for (int e = 0; e < m; ++e) out << ',' << fmt17(draws.a[k][e]);
        for (int i = 0; i < draws.p; ++i)
            for (int q = 0; q < draws.q; ++q)
                out << ',' << fmt17(draws.rho[k](i, q));
        out << '\n';
    }
}

namespace {

std::string var_name(const std::vector<std::string>& names, int i) {
    return i < static_cast<int>(names.size()) ? names[i]
                                              : "v" + std::to_string(i);
}

const char* class_name(ShiftClass c) {
    switch (c) {
        case ShiftClass::positive: return "positive";
        case ShiftClass::negative: return "negative";
        default: return "none";
    }
}

}  // namespace

void write_report_json(const std::string& path, const EdgeShiftReport& report,
                       const std::vector<EdgeShift>& top,
                       const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    out << "{\n  \"level\": " << fmt17(report.level)
        << ",\n  \"p\": " << report.p << ",\n  \"edges\": [\n";
    const auto flagged = report.flagged();
    for (std::size_t k = 0; k < flagged.size(); ++k) {
        const auto& e = flagged[k];
        out << "    {\"i\": " << e.i << ", \"j\": " << e.j << ", \"var_i\": \""
            << var_name(names, e.i) << "\", \"var_j\": \""
            << var_name(names, e.j) << "\", \"mean\": " << fmt17(e.mean)
            << ", \"lo\": " << fmt17(e.lo) << ", \"hi\": " << fmt17(e.hi)
            << ", \"shift\": \"" << class_name(e.cls) << "\"}"
            << (k + 1 < flagged.size() ? ",\n" : "\n");
    }
    out << "  ],\n  \"top\": [\n";
    for (std::size_t k = 0; k < top.size(); ++k) {
        const auto& e = top[k];
        out << "    {\"rank\": " << (k + 1) << ", \"var_i\": \""
            << var_name(names, e.i) << "\", \"var_j\": \""
            << var_name(names, e.j) << "\", \"mean\": " << fmt17(e.mean)
            << "}" << (k + 1 < top.size() ? ",\n" : "\n");
    }
    out << "  ]\n}\n";
}

void write_dot(const std::string& path, const EdgeShiftReport& report,
               const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    out << "graph shifts {\n";
    for (const auto& e : report.flagged()) {
        const bool pos = e.cls == ShiftClass::positive;
        out << "  \"" << var_name(names, e.i) << "\" -- \""
            << var_name(names, e.j) << "\" [sign=" << (pos ? "positive" : "negative")
            << ", color=" << (pos ? "blue" : "red") << "];\n";
    }
    out << "}\n";
}

void write_top_k_csv(const std::string& path,
                     const std::vector<EdgeShift>& top,
                     const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    out << "rank,var_i,var_j,mean,lo,hi,shift\n";
    for (std::size_t k = 0; k < top.size(); ++k) {
        const auto& e = top[k];
        out << (k + 1) << ',' << var_name(names, e.i) << ','
            << var_name(names, e.j) << ',' << fmt17(e.mean) << ','
            << fmt17(e.lo) << ',' << fmt17(e.hi) << ',' << class_name(e.cls)
            << '\n';
    }
}

void write_forecast_csv(const std::string& path, const ForecastResult& fc,
                        const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path);
    out << "variable,step,forecast\n";
    for (int i = 0; i < fc.point.rows(); ++i)
        for (int h = 0; h < fc.point.cols(); ++h)
            out << var_name(names, i) << ',' << (h + 1) << ','
                << fmt17(fc.point(i, h)) << '\n';
}

std::map<std::string, std::string> load_kv_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) +
                             " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("empty key at config line " +
                             std::to_string(line_no));
        out[key] = value;
    }
    return out;
}

std::string file_digest_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunError("cannot open for digest: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace spoutar
