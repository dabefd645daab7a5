#include "regflow/trajectory_csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace regflow {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i;
    out << ",residual,dist_fix,speed\n";
    for (const auto& s : traj.samples) {
        out << format_double(s.t);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(s.x[i]);
        out << ',' << format_double(s.residual) << ',';
        if (s.dist_fix) out << format_double(*s.dist_fix);
        out << ',' << format_double(s.speed) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw UsageError("cannot write " + file.string());
    write_trajectory_csv(out, traj);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw UsageError("trajectory csv line " + std::to_string(line_no) + ": bad number '" + text + "'");
    }
    return v;
}

} // namespace

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw UsageError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() < 5 || header.front() != "t" || header[header.size() - 3] != "residual" ||
        header[header.size() - 2] != "dist_fix" || header.back() != "speed") {
        throw UsageError("trajectory csv: unexpected header '" + line + "'");
    }
    const std::size_t n = header.size() - 4;
    Trajectory traj;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw UsageError("trajectory csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields");
        }
        TrajectorySample s;
        s.t = parse_double(cells[0], line_no);
        s.x.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) s.x[static_cast<Eigen::Index>(i)] = parse_double(cells[1 + i], line_no);
        s.residual = parse_double(cells[n + 1], line_no);
        if (!cells[n + 2].empty()) s.dist_fix = parse_double(cells[n + 2], line_no);
        s.speed = parse_double(cells[n + 3], line_no);
        if (!traj.samples.empty() && s.t <= traj.samples.back().t) {
            throw UsageError("trajectory csv line " + std::to_string(line_no) + ": times must increase");
        }
        traj.samples.push_back(std::move(s));
    }
    return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw UsageError("cannot read " + file.string());
    return read_trajectory_csv(in);
}

} // namespace regflow
