// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtraj/cli.hpp"

namespace qtraj {

std::string package_version() {
    return "0.1.0";
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string temp_path_for(const std::string &path) {
    return path + ".tmp";
}

void ensure_parent(const std::string &path) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
}

}  // namespace

void write_file_atomic(const std::string &path, const std::string &content) {
    ensure_parent(path);
    std::string tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write failed for '" + tmp + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string CsvWriter::header(const std::vector<std::string> &observable_names) {
    std::string h = "traj,step,t,outcome,innovation,innovation2";
    for (const auto &n : observable_names) {
        h += ",";
        h += n;
    }
    h += ",loglik\n";
    return h;
}

CsvWriter::CsvWriter(const std::string &path, const std::vector<std::string> &observable_names, bool two_component)
    : path_(path), tmp_(temp_path_for(path)), two_component_(two_component) {
    ensure_parent(path_);
    file_ = std::fopen(tmp_.c_str(), "wb");
    if (!file_) {
        throw Error("cannot write '" + tmp_ + "'");
    }
    std::string h = header(observable_names);
    std::fwrite(h.data(), 1, h.size(), file_);
}

CsvWriter::~CsvWriter() {
    if (file_) {
        std::fclose(file_);
        std::remove(tmp_.c_str());
    }
}

void CsvWriter::add_trajectory(std::size_t index, const TrajectoryRecord &rec) {
    for (std::size_t k = 0; k < rec.times.size(); k++) {
        line_.clear();
        line_ += std::to_string(index);
        line_ += ',';
        line_ += std::to_string(rec.steps[k]);
        line_ += ',';
        line_ += format_double(rec.times[k]);
        line_ += ',';
        bool first = rec.outcomes[k] < 0;
        if (!first) {
            line_ += rec.outcome_label(k);
        }
        line_ += ',';
        if (!first) {
            line_ += format_double(rec.innovations[k]);
        }
        line_ += ',';
        if (!first && two_component_) {
            line_ += format_double(rec.innovations2[k]);
        }
        for (const auto &series : rec.observables) {
            line_ += ',';
            line_ += format_double(series[k]);
        }
        line_ += ',';
        line_ += format_double(rec.log_likelihood_series[k]);
        line_ += '\n';
        std::fwrite(line_.data(), 1, line_.size(), file_);
    }
}

void CsvWriter::add_reference(const std::vector<double> &times,
                              const std::vector<std::size_t> &steps,
                              const std::vector<std::vector<double>> &series) {
    for (std::size_t k = 0; k < times.size(); k++) {
        line_ = "-1,";
        line_ += std::to_string(steps[k]);
        line_ += ',';
        line_ += format_double(times[k]);
        line_ += ",,,";
        for (const auto &s : series) {
            line_ += ',';
            line_ += format_double(s[k]);
        }
        line_ += ",\n";
        std::fwrite(line_.data(), 1, line_.size(), file_);
    }
}

void CsvWriter::commit() {
    if (!file_) {
        throw Error("CSV already committed");
    }
    bool ok = std::fflush(file_) == 0;
    ok = std::fclose(file_) == 0 && ok;
    file_ = nullptr;
    if (!ok) {
        std::remove(tmp_.c_str());
        throw Error("write failed for '" + tmp_ + "'");
    }
    std::filesystem::rename(tmp_, path_);
}

namespace {

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

std::string escape_xml(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const PlotData &data) {
    const double width = 900, panel_h = 280, left = 70, right = 20, top = 40, bottom = 40;
    const std::size_t max_points = 1000;
    const std::size_t n_panels = std::max<std::size_t>(1, data.names.size());
    const double height = panel_h * static_cast<double>(n_panels);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
       << "\" viewBox=\"0 0 " << fixed(width) << " " << fixed(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (data.times.empty() || data.names.empty()) {
        os << "<text x=\"20\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">no observables recorded</text>\n</svg>\n";
        return os.str();
    }
    const std::size_t n = data.times.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
    const double t0 = data.times.front();
    const double t1 = data.times.back() > t0 ? data.times.back() : t0 + 1;

    for (std::size_t p = 0; p < data.names.size(); p++) {
        double lo = 1e300, hi = -1e300;
        auto scan = [&](const std::vector<double> &s) {
            for (double v : s) {
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        };
        for (const auto &tr : data.trajectories) scan(tr[p]);
        scan(data.mean[p]);
        if (data.reference) scan((*data.reference)[p]);
        if (!(hi > lo)) {
            lo -= 1;
            hi += 1;
        }
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        const double y0 = panel_h * static_cast<double>(p);
        const double pw = width - left - right, ph = panel_h - top - bottom;
        auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
        auto Y = [&](double v) { return y0 + top + (hi - v) / (hi - lo) * ph; };
        auto polyline = [&](const std::vector<double> &s, const char *style) {
            os << "<polyline fill=\"none\" " << style << " points=\"";
            for (std::size_t k = 0; k < n; k += stride) {
                os << fixed(X(data.times[k])) << "," << fixed(Y(s[k])) << " ";
            }
            if ((n - 1) % stride != 0) {
                os << fixed(X(data.times[n - 1])) << "," << fixed(Y(s[n - 1]));
            }
            os << "\"/>\n";
        };

        os << "<g>\n";
        os << "<text x=\"" << fixed(left) << "\" y=\"" << fixed(y0 + 25)
           << "\" font-family=\"sans-serif\" font-size=\"14\">" << escape_xml(data.names[p]) << "</text>\n";
        os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(y0 + top) << "\" width=\"" << fixed(pw)
           << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int tick = 0; tick <= 4; tick++) {
            double v = lo + (hi - lo) * tick / 4.0;
            double t = t0 + (t1 - t0) * tick / 4.0;
            os << "<text x=\"" << fixed(left - 5) << "\" y=\"" << fixed(Y(v) + 4)
               << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << fixed(v) << "</text>\n";
            os << "<text x=\"" << fixed(X(t)) << "\" y=\"" << fixed(y0 + top + ph + 15)
               << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << fixed(t) << "</text>\n";
        }
        for (std::size_t i = 1; i < data.trajectories.size(); i++) {
            polyline(data.trajectories[i][p], "stroke=\"#999999\" stroke-opacity=\"0.35\" stroke-width=\"0.7\"");
        }
        for (double t : data.jump_times) {
            os << "<line x1=\"" << fixed(X(t)) << "\" x2=\"" << fixed(X(t)) << "\" y1=\"" << fixed(y0 + top)
               << "\" y2=\"" << fixed(y0 + top + ph) << "\" stroke=\"#2a8f2a\" stroke-dasharray=\"4,3\" stroke-width=\"0.8\"/>\n";
        }
        if (!data.trajectories.empty()) {
            polyline(data.trajectories[0][p], "stroke=\"#2a8f2a\" stroke-width=\"1.4\"");
        }
        polyline(data.mean[p], "stroke=\"#cc2222\" stroke-width=\"1.4\"");
        if (data.reference) {
            polyline((*data.reference)[p], "stroke=\"#1f4fbf\" stroke-width=\"2\"");
        }
        os << "<text x=\"" << fixed(width - right) << "\" y=\"" << fixed(y0 + 25)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
           << "grey: trajectories, green: trajectory 0, red: ensemble mean"
           << (data.reference ? ", blue: master equation" : "") << "</text>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace qtraj
