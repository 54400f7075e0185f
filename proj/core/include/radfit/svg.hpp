#pragma once

#include <filesystem>
#include <string>

namespace radfit {

enum class PlotKind { Heatmap, Boxplot, CurveOverlay };

PlotKind plot_kind_from_string(const std::string& s);

/// Render a result CSV to a self-contained SVG. Input schemas:
///   heatmap       - per-device report CSV (write_report_csv)
///   boxplot       - fold accuracy CSV "model,fold,accuracy"
///   curve_overlay - "fluence_ncm2,measured_a,predicted_a"
/// Output bytes are a pure function of the input.
void emit_plot(const std::filesystem::path& csv_path, PlotKind kind,
               const std::filesystem::path& out_path);

}  // namespace radfit
