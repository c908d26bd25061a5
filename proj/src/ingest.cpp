#include "phasefeat/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "phasefeat/error.hpp"

namespace phasefeat {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_double(std::string_view token) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end || token.empty()) return std::nullopt;
    return value;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(ClassLabel label) {
    switch (label) {
        case ClassLabel::Alzheimer: return "ALZ";
        case ClassLabel::MCI: return "MCI";
        case ClassLabel::Normal: return "NORMAL";
    }
    return "?";
}

std::optional<ClassLabel> parse_label(std::string_view token) {
    const auto t = upper(trim(token));
    if (t == "1" || t == "ALZ") return ClassLabel::Alzheimer;
    if (t == "2" || t == "MCI") return ClassLabel::MCI;
    if (t == "3" || t == "NORMAL") return ClassLabel::Normal;
    return std::nullopt;
}

RoiTimeSeries::RoiTimeSeries(std::string subject_id, Matrix data, double dt,
                             std::vector<std::string> region_names)
    : subject_id_(std::move(subject_id)),
      data_(std::move(data)),
      dt_(dt),
      region_names_(std::move(region_names)) {
    const std::string who = subject_id_.empty() ? std::string("series") : "subject " + subject_id_;
    if (data_.rows() < kMinRegions)
        throw DataError(who + ": need at least 2 regions, got " + std::to_string(data_.rows()));
    if (data_.cols() < kMinTimepoints)
        throw DataError(who + ": need at least 16 timepoints, got " + std::to_string(data_.cols()));
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
        throw DataError(who + ": sampling interval must be positive");
    for (std::size_t r = 0; r < data_.rows(); ++r)
        for (std::size_t t = 0; t < data_.cols(); ++t)
            if (!std::isfinite(data_(r, t)))
                throw DataError(who + ": non-finite value at region " + std::to_string(r) +
                                ", timepoint " + std::to_string(t));
    if (!region_names_.empty() && region_names_.size() != data_.rows())
        throw DataError(who + ": region name count does not match region count");
}

std::vector<ClassLabel> SubjectCohort::labels() const {
    std::vector<ClassLabel> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.label);
    return out;
}

SubjectCohort load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());

    const auto base = path.parent_path();
    SubjectCohort cohort;
    std::unordered_map<std::string, std::size_t> seen;  // id -> row number
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (!header_seen) {
            if (cells.size() != 3 || cells[0] != "subject_id" || cells[1] != "label" ||
                cells[2] != "path")
                throw DataError(path.string() + ": row " + std::to_string(row) +
                                ": expected header 'subject_id,label,path'");
            header_seen = true;
            continue;
        }
        if (cells.size() != 3 || cells[0].empty() || cells[2].empty())
            throw DataError(path.string() + ": row " + std::to_string(row) +
                            ": expected 3 non-empty fields");
        const std::string id(cells[0]);
        const auto label = parse_label(cells[1]);
        if (!label)
            throw DataError(path.string() + ": row " + std::to_string(row) + ": unknown label '" +
                            std::string(cells[1]) + "'");
        if (const auto it = seen.find(id); it != seen.end())
            throw DataError(path.string() + ": duplicate subject_id '" + id + "' in rows " +
                            std::to_string(it->second) + " and " + std::to_string(row));
        seen.emplace(id, row);
        std::filesystem::path p{std::string(cells[2])};
        if (p.is_relative()) p = base / p;
        cohort.records.push_back({id, *label, p});
    }
    if (!header_seen) throw DataError(path.string() + ": empty manifest");
    return cohort;
}

void write_manifest(const std::filesystem::path& path, const SubjectCohort& cohort) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path.string());
    const auto base = path.parent_path();
    out << "subject_id,label,path\n";
    for (const auto& r : cohort.records) {
        auto rel = r.path.lexically_relative(base.empty() ? std::filesystem::path(".") : base);
        if (rel.empty() || *rel.begin() == "..") rel = r.path;
        out << r.subject_id << ',' << static_cast<int>(r.label) << ',' << rel.generic_string()
            << '\n';
    }
    if (!out) throw DataError("write failed for " + path.string());
}

RoiTimeSeries load_roi_csv(const std::filesystem::path& path, double dt, std::string subject_id) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ROI file " + path.string());
    const std::string where = path.string();

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;  // timepoint-major as read
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (rows.empty() && names.empty()) {
            const bool numeric = std::all_of(cells.begin(), cells.end(),
                                             [](auto c) { return parse_double(c).has_value(); });
            if (!numeric) {
                for (auto c : cells) names.emplace_back(c);
                width = cells.size();
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw DataError(where + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(width));
        std::vector<double> values(width);
        for (std::size_t c = 0; c < width; ++c) {
            const auto v = parse_double(cells[c]);
            if (!v)
                throw DataError(where + ": unparsable value '" + std::string(cells[c]) +
                                "' at line " + std::to_string(line_no) + ", column " +
                                std::to_string(c + 1));
            if (!std::isfinite(*v))
                throw DataError(where + ": non-finite value at line " + std::to_string(line_no) +
                                ", column " + std::to_string(c + 1));
            values[c] = *v;
        }
        rows.push_back(std::move(values));
    }
    if (rows.size() < kMinTimepoints)
        throw DataError(where + ": need at least 16 timepoints, got " + std::to_string(rows.size()));
    if (width < kMinRegions)
        throw DataError(where + ": need at least 2 regions, got " + std::to_string(width));

    Matrix data(width, rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t r = 0; r < width; ++r) data(r, t) = rows[t][r];
    return RoiTimeSeries(std::move(subject_id), std::move(data), dt, std::move(names));
}

void write_roi_csv(const std::filesystem::path& path, const RoiTimeSeries& ts) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write ROI file " + path.string());
    const auto& names = ts.region_names();
    if (!names.empty()) {
        for (std::size_t r = 0; r < names.size(); ++r) out << (r ? "," : "") << names[r];
        out << '\n';
    }
    const auto& d = ts.data();
    std::string buf;
    for (std::size_t t = 0; t < ts.timepoints(); ++t) {
        buf.clear();
        for (std::size_t r = 0; r < ts.regions(); ++r) {
            if (r) buf += ',';
            buf += format_double(d(r, t));
        }
        buf += '\n';
        out << buf;
    }
    if (!out) throw DataError("write failed for " + path.string());
}

ValidationReport validate_cohort(const SubjectCohort& cohort, double dt) {
    ValidationReport report;
    if (cohort.records.empty()) {
        report.findings.emplace_back("no subjects");
        return report;
    }
    std::vector<std::pair<std::string, std::size_t>> dims;
    for (const auto& rec : cohort.records) {
        ++report.class_counts[class_index(rec.label)];
        try {
            const auto ts = load_roi_csv(rec.path, dt, rec.subject_id);
            dims.emplace_back(rec.subject_id, ts.regions());
        } catch (const std::exception& e) {
            report.findings.push_back("subject " + rec.subject_id + ": unreadable: " + e.what());
        }
    }

    // Reference region count: the cohort's own if known, else the most common one.
    std::optional<std::size_t> reference = cohort.region_count;
    if (!reference && !dims.empty()) {
        std::map<std::size_t, std::size_t> freq;
        for (const auto& [id, n] : dims) ++freq[n];
        std::size_t best = 0;
        for (const auto& [id, n] : dims)
            if (freq[n] > best) {
                best = freq[n];
                reference = n;
            }
    }
    report.region_count = reference;
    for (const auto& [id, n] : dims)
        if (reference && n != *reference)
            report.findings.push_back("subject " + id + ": region count " + std::to_string(n) +
                                      " differs from cohort region count " +
                                      std::to_string(*reference));
    return report;
}

}  // namespace phasefeat
