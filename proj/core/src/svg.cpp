#include "radfit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radfit/errors.hpp"
#include "radfit/text.hpp"

namespace radfit {

namespace {

std::string fmt(double v) {
    // Round to 0.01 px so coordinates do not carry binary noise.
    return format_double(std::round(v * 100.0) / 100.0);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plot input: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.size() < 2) throw FormatError("plot input has no data rows: " + path.string());
    return rows;
}

void require_columns(const std::vector<std::vector<std::string>>& rows, std::size_t n,
                     const std::filesystem::path& path) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() < n)
            throw FormatError("plot input " + path.string() + ": row " + std::to_string(i) +
                              " has " + std::to_string(rows[i].size()) + " columns, expected " +
                              std::to_string(n));
    }
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void text_at(std::ostringstream& svg, double x, double y, const std::string& s,
             const std::string& anchor = "middle", int size = 11) {
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
        << "\" font-family=\"monospace\" text-anchor=\"" << anchor << "\">" << escape_xml(s)
        << "</text>\n";
}

void write_svg(const std::string& body, double w, double h,
               const std::filesystem::path& out_path) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write plot: " + out_path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
        << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
        << "\" fill=\"#ffffff\"/>\n"
        << body << "</svg>\n";
}

// ---------------------------------------------------------------- heatmap

void emit_heatmap(const std::filesystem::path& csv_path, const std::filesystem::path& out_path) {
    auto rows = read_csv(csv_path);
    require_columns(rows, 7, csv_path);
    // device_id,manufacturer,device_index,fold,true_status,predicted_status,correct
    struct Cell {
        std::string status;
        bool correct;
    };
    std::map<int, std::map<char, Cell>> grid;  // device_index -> manufacturer -> cell
    std::set<char> mfrs;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        char mfr = rows[i][1].empty() ? '?' : rows[i][1][0];
        int idx = std::stoi(rows[i][2]);
        mfrs.insert(mfr);
        grid[idx][mfr] = {rows[i][4], rows[i][6] == "1"};
    }
    const double cell_w = 86.0, cell_h = 22.0, left = 64.0, top = 40.0;
    const double w = left + cell_w * static_cast<double>(mfrs.size()) + 20.0;
    const double h = top + cell_h * static_cast<double>(grid.size()) + 20.0;

    std::ostringstream svg;
    std::map<char, double> col_x;
    double x = left;
    for (char m : mfrs) {
        col_x[m] = x;
        text_at(svg, x + cell_w / 2.0, top - 8.0, std::string(1, m));
        x += cell_w;
    }
    double y = top;
    for (const auto& [idx, by_mfr] : grid) {
        text_at(svg, left - 8.0, y + cell_h - 6.0, std::to_string(idx), "end");
        for (char m : mfrs) {
            auto it = by_mfr.find(m);
            const std::string fill = it == by_mfr.end() ? "#dddddd"
                                     : it->second.correct ? "#5b8dd9"
                                                          : "#ffffff";
            svg << "<rect x=\"" << fmt(col_x[m]) << "\" y=\"" << fmt(y) << "\" width=\""
                << fmt(cell_w) << "\" height=\"" << fmt(cell_h)
                << "\" fill=\"" << fill << "\" stroke=\"#444444\"/>\n";
            if (it != by_mfr.end())
                text_at(svg, col_x[m] + cell_w / 2.0, y + cell_h - 6.0, it->second.status,
                        "middle", 9);
        }
        y += cell_h;
    }
    write_svg(svg.str(), w, h, out_path);
}

// ---------------------------------------------------------------- boxplot

struct BoxStats {
    double lo, q1, med, q3, hi;
};

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(i);
    return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

void emit_boxplot(const std::filesystem::path& csv_path, const std::filesystem::path& out_path) {
    auto rows = read_csv(csv_path);
    require_columns(rows, 3, csv_path);
    // model,fold,accuracy
    std::map<std::string, std::vector<double>> by_model;
    for (std::size_t i = 1; i < rows.size(); ++i)
        by_model[rows[i][0]].push_back(parse_double(rows[i][2]));

    std::map<std::string, BoxStats> stats;
    for (auto& [name, vals] : by_model) {
        std::sort(vals.begin(), vals.end());
        stats[name] = {vals.front(), quantile(vals, 0.25), quantile(vals, 0.5),
                       quantile(vals, 0.75), vals.back()};
    }
    const double left = 60.0, top = 20.0, plot_h = 260.0, slot_w = 110.0, box_w = 54.0;
    const double w = left + slot_w * static_cast<double>(stats.size()) + 20.0;
    const double h = top + plot_h + 50.0;
    // accuracy axis fixed to [0, 1]: plots from different runs stay comparable
    auto y_of = [&](double v) { return top + plot_h * (1.0 - v); };

    std::ostringstream svg;
    svg << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
        << "\" y2=\"" << fmt(top + plot_h) << "\" stroke=\"#000000\"/>\n";
    for (int tick = 0; tick <= 10; tick += 2) {
        const double v = tick / 10.0;
        svg << "<line x1=\"" << fmt(left - 4.0) << "\" y1=\"" << fmt(y_of(v)) << "\" x2=\""
            << fmt(left) << "\" y2=\"" << fmt(y_of(v)) << "\" stroke=\"#000000\"/>\n";
        text_at(svg, left - 8.0, y_of(v) + 4.0, format_double(v), "end");
    }
    double cx = left + slot_w / 2.0;
    for (const auto& [name, s] : stats) {
        const double bx = cx - box_w / 2.0;
        svg << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y_of(s.lo)) << "\" x2=\"" << fmt(cx)
            << "\" y2=\"" << fmt(y_of(s.hi)) << "\" stroke=\"#000000\"/>\n";
        for (double whisker : {s.lo, s.hi})
            svg << "<line x1=\"" << fmt(cx - box_w / 4.0) << "\" y1=\"" << fmt(y_of(whisker))
                << "\" x2=\"" << fmt(cx + box_w / 4.0) << "\" y2=\"" << fmt(y_of(whisker))
                << "\" stroke=\"#000000\"/>\n";
        svg << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(y_of(s.q3)) << "\" width=\""
            << fmt(box_w) << "\" height=\"" << fmt(y_of(s.q1) - y_of(s.q3))
            << "\" fill=\"#a8c4e8\" stroke=\"#000000\"/>\n";
        svg << "<line x1=\"" << fmt(bx) << "\" y1=\"" << fmt(y_of(s.med)) << "\" x2=\""
            << fmt(bx + box_w) << "\" y2=\"" << fmt(y_of(s.med))
            << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
        text_at(svg, cx, top + plot_h + 18.0, name);
        cx += slot_w;
    }
    write_svg(svg.str(), w, h, out_path);
}

// ----------------------------------------------------------- curve overlay

void emit_curve_overlay(const std::filesystem::path& csv_path,
                        const std::filesystem::path& out_path) {
    auto rows = read_csv(csv_path);
    require_columns(rows, 3, csv_path);
    // fluence_ncm2,measured_a,predicted_a
    std::vector<double> xs, meas, pred;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        xs.push_back(parse_double(rows[i][0]));
        meas.push_back(parse_double(rows[i][1]));
        pred.push_back(parse_double(rows[i][2]));
    }
    double x_lo = *std::min_element(xs.begin(), xs.end());
    double x_hi = *std::max_element(xs.begin(), xs.end());
    double y_lo = std::min(*std::min_element(meas.begin(), meas.end()),
                           *std::min_element(pred.begin(), pred.end()));
    double y_hi = std::max(*std::max_element(meas.begin(), meas.end()),
                           *std::max_element(pred.begin(), pred.end()));
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double left = 70.0, top = 20.0, plot_w = 480.0, plot_h = 300.0;
    const double w = left + plot_w + 30.0, h = top + plot_h + 50.0;
    auto px = [&](double x) { return left + plot_w * (x - x_lo) / (x_hi - x_lo); };
    auto py = [&](double y) { return top + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

    std::ostringstream svg;
    svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(plot_w)
        << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    auto polyline = [&](const std::vector<double>& ys, const char* color, const char* dash) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dash[0] != '\0') svg << " stroke-dasharray=\"" << dash << "\"";
        svg << " points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt(px(xs[i])) << ',' << fmt(py(ys[i]));
        }
        svg << "\"/>\n";
    };
    polyline(meas, "#2255aa", "");
    polyline(pred, "#cc3311", "6,3");
    text_at(svg, left - 8.0, py(y_lo + pad) + 4.0, format_double(y_lo + pad), "end", 10);
    text_at(svg, left - 8.0, py(y_hi - pad) + 4.0, format_double(y_hi - pad), "end", 10);
    text_at(svg, px(x_lo), top + plot_h + 16.0, format_double(x_lo), "start", 10);
    text_at(svg, px(x_hi), top + plot_h + 16.0, format_double(x_hi), "end", 10);
    text_at(svg, left + plot_w - 10.0, top + 16.0, "measured", "end", 10);
    text_at(svg, left + plot_w - 10.0, top + 30.0, "predicted", "end", 10);
    write_svg(svg.str(), w, h, out_path);
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "heatmap") return PlotKind::Heatmap;
    if (s == "boxplot") return PlotKind::Boxplot;
    if (s == "curve_overlay") return PlotKind::CurveOverlay;
    throw DomainError("unknown plot kind: " + s);
}

void emit_plot(const std::filesystem::path& csv_path, PlotKind kind,
               const std::filesystem::path& out_path) {
    switch (kind) {
        case PlotKind::Heatmap: emit_heatmap(csv_path, out_path); break;
        case PlotKind::Boxplot: emit_boxplot(csv_path, out_path); break;
        case PlotKind::CurveOverlay: emit_curve_overlay(csv_path, out_path); break;
    }
}

}  // namespace radfit
