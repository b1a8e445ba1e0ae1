#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hypb/survey.hpp"
#include "hypb/table.hpp"

namespace hypb::io {

// decimal with 17 significant digits; deterministic across reruns
std::string fmt_g17(double v);

std::string sha1_hex(std::string_view data);
// git-style content hash: sha1("blob <len>\0" + content)
std::string git_blob_hash(std::string_view content);

void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::vector<double> quantiles(std::vector<double> v, const std::vector<double>& qs);

std::string table_to_json(const Table& t);
std::string certificate_to_json(const GeometryCertificate& cert, const Table& t,
                                const SpiralParams* spiral, double h_o,
                                const std::string& config_hash,
                                const std::string& table_hash);
std::string cone_report_to_json(const ConeSurveyReport& rep, const std::string& table_hash,
                                const std::string& config_hash);
std::string lyapunov_report_to_json(const LyapunovSurveyReport& rep,
                                    const std::string& table_hash,
                                    const std::string& config_hash);
std::string lyapunov_rows_csv(const LyapunovSurveyReport& rep, const std::string& table_hash,
                              const std::string& config_hash);

std::string table_to_svg(const Table& t);
std::string trajectory_svg(const Table& t, const std::vector<Point2>& collision_points);

struct StudyRow {
    double k_f, h_o, area_opt, diam_opt, area_spiral, diam_spiral;
    double k1, k2, k3;
    long long n_bar, rounds;
};
std::string study_csv(const std::vector<StudyRow>& rows, const std::string& config_hash);
std::string study_plots_svg(const std::vector<StudyRow>& rows);

}  // namespace hypb::io
