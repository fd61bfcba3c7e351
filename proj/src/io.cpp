#include "rainrisk/io.hpp"

#include "rainrisk/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace fs = std::filesystem;
using nlohmann::json;

namespace rainrisk {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.push_back("");
    }
    return fields;
}

long parse_long(const std::string& text, const std::string& path, int line_no) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path + " line " + std::to_string(line_no) + ": cannot parse '" +
                              text + "' as an integer");
    }
}

double parse_double(const std::string& text, const std::string& path, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path + " line " + std::to_string(line_no) + ": cannot parse '" +
                              text + "' as a number");
    }
}

std::uint64_t fnv1a(const char* data, std::size_t size, std::uint64_t h = 1469598103934665603ULL) {
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string metric_or(const std::vector<double>& values, std::size_t index,
                      const std::string& fallback) {
    if (index < values.size()) {
        return fmt(values[index]);
    }
    return fallback;
}

json params_to_json(const FitRecord& rec) {
    json j;
    j["order"] = {{"p", rec.order.p}, {"d", rec.order.d}, {"q", rec.order.q},
                  {"constant", rec.order.include_constant}, {"exog_count", rec.order.exog_count}};
    j["mean"] = {{"constant", rec.mean_params.constant},
                 {"ar", rec.mean_params.ar},
                 {"ma", rec.mean_params.ma},
                 {"exog", rec.mean_params.exog}};
    if (rec.model == ModelKind::garch_arima || rec.model == ModelKind::garch_arimax) {
        j["variance"] = {{"omega", rec.var_params.omega},
                         {"alpha", rec.var_params.alpha},
                         {"beta", rec.var_params.beta},
                         {"gamma", rec.var_params.gamma_asym},
                         {"init_sigma2", rec.init_sigma2}};
    } else {
        j["variance"] = {{"sigma2", rec.sigma2_const}};
    }
    return j;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["rainfall_path"] = c.rainfall_path;
    j["production_path"] = c.production_path;
    j["holdout"] = c.holdout;
    j["floor_mm"] = c.floor_mm;
    j["rv4_sqrt"] = c.rv4_sqrt;
    j["order_override"] = c.order_override;
    j["p"] = c.p;
    j["d"] = c.d;
    j["q"] = c.q;
    j["max_order"] = c.max_order;
    j["include_constant"] = c.include_constant;
    j["garch_r"] = c.garch_r;
    j["garch_s"] = c.garch_s;
    j["families"] = c.families;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["opt_max_evals"] = c.opt_max_evals;
    j["opt_tol"] = c.opt_tol;
    j["strict"] = c.strict;
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace

GridConfig RunConfig::to_grid_config() const {
    GridConfig g;
    g.split.holdout = holdout;
    g.diff_order = d;
    g.order_override = order_override;
    g.forced_p = p;
    g.forced_q = q;
    g.include_constant = include_constant;
    g.max_order = max_order;
    g.garch_r = garch_r;
    g.garch_s = garch_s;
    g.risk.floor_mm = floor_mm;
    g.risk.rv4_sqrt = rv4_sqrt;
    g.opt.max_evals = opt_max_evals;
    g.opt.tol_x = opt_tol;
    g.opt.seed = seed;
    g.threads = threads;
    return g;
}

MonthlyRainfallSeries ingest_rainfall(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open rainfall file " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": empty file");
    }
    {
        const auto header = split_csv_line(line);
        if (header.size() != 3 || header[0] != "year" || header[1] != "month" ||
            header[2] != "rainfall_mm") {
            throw ValidationError(path + ": expected header 'year,month,rainfall_mm'");
        }
    }

    std::map<std::pair<long, long>, double> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw ValidationError(path + " line " + std::to_string(line_no) +
                                  ": expected 3 fields");
        }
        const long year = parse_long(fields[0], path, line_no);
        const long month = parse_long(fields[1], path, line_no);
        const double value = parse_double(fields[2], path, line_no);
        if (month < 1 || month > 12) {
            throw ValidationError(path + " line " + std::to_string(line_no) + ": month " +
                                  std::to_string(month) + " out of range 1-12");
        }
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw ValidationError(path + " line " + std::to_string(line_no) + ": year " +
                                  std::to_string(year) + " month " + std::to_string(month) +
                                  " rainfall must be non-negative and finite");
        }
        if (!entries.emplace(std::make_pair(year, month), value).second) {
            throw ValidationError(path + " line " + std::to_string(line_no) +
                                  ": duplicate row for year " + std::to_string(year) + " month " +
                                  std::to_string(month));
        }
    }
    if (entries.empty()) {
        throw ValidationError(path + ": no data rows");
    }

    const long first_year = entries.begin()->first.first;
    const long last_year = entries.rbegin()->first.first;
    std::vector<std::array<double, 12>> rows;
    rows.reserve(static_cast<std::size_t>(last_year - first_year + 1));
    for (long year = first_year; year <= last_year; ++year) {
        std::array<double, 12> row{};
        for (long month = 1; month <= 12; ++month) {
            const auto it = entries.find({year, month});
            if (it == entries.end()) {
                throw ValidationError(path + ": year " + std::to_string(year) + " month " +
                                      std::to_string(month) + " missing");
            }
            row[static_cast<std::size_t>(month - 1)] = it->second;
        }
        rows.push_back(row);
    }
    return MonthlyRainfallSeries(static_cast<int>(first_year), std::move(rows));
}

AnnualSeries ingest_production(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open production file " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": empty file");
    }
    std::string unit_label;
    {
        const auto header = split_csv_line(line);
        if (header.size() < 2 || header.size() > 3 || header[0] != "year" ||
            header[1] != "production") {
            throw ValidationError(path + ": expected header 'year,production[,unit]'");
        }
        if (header.size() == 3) {
            unit_label = header[2];
        }
    }

    std::vector<std::pair<long, double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ValidationError(path + " line " + std::to_string(line_no) +
                                  ": expected 2 fields");
        }
        const long year = parse_long(fields[0], path, line_no);
        const double value = parse_double(fields[1], path, line_no);
        if (!std::isfinite(value)) {
            throw ValidationError(path + " line " + std::to_string(line_no) +
                                  ": production must be finite");
        }
        rows.emplace_back(year, value);
    }
    if (rows.empty()) {
        throw ValidationError(path + ": no data rows");
    }

    if (!std::is_sorted(rows.begin(), rows.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        if (warnings != nullptr) {
            warnings->push_back(path + ": rows were not sorted by year; sorted on ingest");
        }
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw ValidationError(path + ": duplicate year " + std::to_string(rows[i].first));
        }
        if (rows[i].first != rows[i - 1].first + 1) {
            throw ValidationError(path + ": gap between years " + std::to_string(rows[i - 1].first) +
                                  " and " + std::to_string(rows[i].first));
        }
    }
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& [year, value] : rows) {
        values.push_back(value);
    }
    return AnnualSeries(static_cast<int>(rows.front().first), std::move(values), unit_label);
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path + " for hashing");
    }
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return to_hex(h);
}

std::string string_hash(const std::string& text) {
    return to_hex(fnv1a(text.data(), text.size()));
}

namespace {

std::string render_grid_csv(const EvaluationGrid& grid, const std::string& config_hash) {
    std::string out;
    out += "# config_hash=" + config_hash + "\n";
    out += "family,alignment,rv,model,aic_raw,aic_per_obs";
    const int h = grid.holdout;
    for (int i = 1; i <= h; ++i) out += ",mae_h" + std::to_string(i);
    for (int i = 1; i <= h; ++i) out += ",mae_cum_h" + std::to_string(i);
    for (int i = 1; i <= h; ++i) out += ",rmse_h" + std::to_string(i);
    for (int i = 1; i <= h; ++i) out += ",rmse_cum_h" + std::to_string(i);
    out += ",converged\n";
    for (const GridCell& cell : grid.cells) {
        const FitRecord& rec = grid.fit_for(cell);
        const bool failed = !rec.metrics.error.empty();
        out += to_string(cell.family_block);
        out += ",";
        out += to_string(cell.alignment);
        out += ",";
        out += to_string(cell.rv_block);
        out += ",";
        out += to_string(cell.model);
        out += ",";
        out += failed ? "nan" : fmt(rec.metrics.aic_raw);
        out += ",";
        out += failed ? "nan" : fmt(rec.metrics.aic_per_obs);
        for (int i = 0; i < h; ++i) out += "," + metric_or(rec.metrics.mae_per_horizon, i, "nan");
        for (int i = 0; i < h; ++i) out += "," + metric_or(rec.metrics.mae_cumulative, i, "nan");
        for (int i = 0; i < h; ++i) out += "," + metric_or(rec.metrics.rmse_per_horizon, i, "nan");
        for (int i = 0; i < h; ++i) out += "," + metric_or(rec.metrics.rmse_cumulative, i, "nan");
        out += ",";
        out += rec.metrics.converged ? "true" : "false";
        out += "\n";
    }
    return out;
}

constexpr std::array<GarchFamily, 4> kFamilyOrder = {GarchFamily::sgarch, GarchFamily::egarch,
                                                     GarchFamily::gjrgarch, GarchFamily::igarch};
constexpr std::array<RegressorAlignment, 2> kAlignOrder = {RegressorAlignment::lag1,
                                                           RegressorAlignment::same_time};
constexpr std::array<RiskVariant, 4> kRvOrder = {RiskVariant::rv1, RiskVariant::rv2,
                                                 RiskVariant::rv3, RiskVariant::rv4};

std::string aic_entry(const EvaluationGrid& grid, GarchFamily family, RegressorAlignment align,
                      RiskVariant rv, ModelKind model) {
    const GridCell* cell = grid.find_cell(family, align, rv, model);
    if (cell == nullptr) {
        return "-";
    }
    const FitRecord& rec = grid.fit_for(*cell);
    if (!rec.metrics.error.empty()) {
        return "failed";
    }
    const bool garch = model == ModelKind::garch_arima || model == ModelKind::garch_arimax;
    return fmt(garch ? rec.metrics.aic_per_obs : rec.metrics.aic_raw);
}

std::string mae_entry(const EvaluationGrid& grid, GarchFamily family, RegressorAlignment align,
                      RiskVariant rv, ModelKind model, int step) {
    const GridCell* cell = grid.find_cell(family, align, rv, model);
    if (cell == nullptr) {
        return "-";
    }
    const FitRecord& rec = grid.fit_for(*cell);
    if (!rec.metrics.error.empty()) {
        return "failed";
    }
    return metric_or(rec.metrics.mae_cumulative, static_cast<std::size_t>(step - 1), "-");
}

std::string render_tables_md(const EvaluationGrid& grid, const std::string& config_hash) {
    std::string out;
    out += "# Model comparison tables\n\n";
    out += "config_hash: " + config_hash + "\n\n";
    out += "Mean order: ARIMA(" + std::to_string(grid.order_used.p) + "," +
           std::to_string(grid.order_used.d) + "," + std::to_string(grid.order_used.q) + ")";
    out += grid.order_used.include_constant ? " with constant" : " without constant";
    out += ". Training years " + std::to_string(grid.first_train_year) + "-" +
           std::to_string(grid.last_train_year) + ", holdout " + std::to_string(grid.holdout) +
           ".\n\n";

    // Table 1: AIC. Constant-variance columns show raw AIC, GARCH columns
    // the per-observation convention; the header says which is which.
    out += "## Table 1: AIC\n\n";
    out += "| row | ARIMA (raw) | GARCH-ARIMA (/n) |";
    for (RiskVariant rv : kRvOrder) {
        out += std::string(" ") + to_string(rv) + " ARIMAX (raw) | " + to_string(rv) +
               " GARCH-ARIMAX (/n) |";
    }
    out += "\n|---|---|---|";
    for (std::size_t i = 0; i < kRvOrder.size(); ++i) {
        out += "---|---|";
    }
    out += "\n";
    for (GarchFamily family : kFamilyOrder) {
        for (RegressorAlignment align : kAlignOrder) {
            out += std::string("| ") + to_string(align) + " (" + to_string(family) + ") | ";
            out += aic_entry(grid, family, align, kRvOrder[0], ModelKind::arima) + " | ";
            out += aic_entry(grid, family, align, kRvOrder[0], ModelKind::garch_arima) + " |";
            for (RiskVariant rv : kRvOrder) {
                out += " " + aic_entry(grid, family, align, rv, ModelKind::arimax) + " | ";
                out += aic_entry(grid, family, align, rv, ModelKind::garch_arimax) + " |";
            }
            out += "\n";
        }
    }
    out += "\n";

    // Tables 2..9: cumulative MAE per family and risk-variant pair.
    int table_no = 2;
    for (GarchFamily family : kFamilyOrder) {
        for (int pair = 0; pair < 2; ++pair) {
            const RiskVariant rv_a = kRvOrder[static_cast<std::size_t>(2 * pair)];
            const RiskVariant rv_b = kRvOrder[static_cast<std::size_t>(2 * pair + 1)];
            out += "## Table " + std::to_string(table_no++) + ": MAE, " + to_string(family) +
                   ", " + to_string(rv_a) + " & " + to_string(rv_b) + "\n\n";
            out += "| step |";
            for (RiskVariant rv : {rv_a, rv_b}) {
                for (ModelKind model : {ModelKind::arima, ModelKind::garch_arima,
                                        ModelKind::arimax, ModelKind::garch_arimax}) {
                    out += std::string(" ") + to_string(rv) + " " + to_string(model) + " |";
                }
            }
            out += "\n|---|";
            for (int c = 0; c < 8; ++c) {
                out += "---|";
            }
            out += "\n";
            for (RegressorAlignment align : kAlignOrder) {
                for (int step = 1; step <= grid.holdout; ++step) {
                    out += "| " + std::to_string(step) + " step (" + to_string(align) + ") |";
                    for (RiskVariant rv : {rv_a, rv_b}) {
                        for (ModelKind model : {ModelKind::arima, ModelKind::garch_arima,
                                                ModelKind::arimax, ModelKind::garch_arimax}) {
                            out += " " + mae_entry(grid, family, align, rv, model, step) + " |";
                        }
                    }
                    out += "\n";
                }
            }
            out += "\n";
        }
    }
    return out;
}

json fit_record_to_json(const FitRecord& rec, const std::string& config_hash) {
    json j;
    j["config_hash"] = config_hash;
    j["key"] = rec.key;
    j["model"] = to_string(rec.model);
    if (rec.model == ModelKind::garch_arima || rec.model == ModelKind::garch_arimax) {
        j["family"] = to_string(rec.family);
    }
    if (rec.model == ModelKind::arimax || rec.model == ModelKind::garch_arimax) {
        j["rv"] = to_string(rec.rv);
        j["alignment"] = to_string(rec.alignment);
    }
    j["params"] = params_to_json(rec);
    j["loglik"] = rec.loglik;
    j["aic_raw"] = rec.metrics.aic_raw;
    j["aic_per_obs"] = rec.metrics.aic_per_obs;
    j["converged"] = rec.metrics.converged;
    j["near_boundary"] = rec.near_boundary;
    if (!rec.metrics.error.empty()) {
        j["error"] = rec.metrics.error;
    } else {
        j["sigma2_path"] = rec.sigma2_path;
        j["forecast_levels"] = rec.forecast_levels;
        j["mae_per_horizon"] = rec.metrics.mae_per_horizon;
        j["mae_cumulative"] = rec.metrics.mae_cumulative;
        j["rmse_per_horizon"] = rec.metrics.rmse_per_horizon;
        j["rmse_cumulative"] = rec.metrics.rmse_cumulative;
    }
    return j;
}

}  // namespace

ReportBundle emit_reports(const EvaluationGrid& grid, const RunConfig& config,
                          const fs::path& out_dir) {
    if (grid.cells.empty() || grid.fits.empty()) {
        throw ValidationError("emit_reports: refusing to write an empty grid");
    }
    std::error_code ec;
    if (fs::exists(out_dir)) {
        throw IoError("output directory " + out_dir.string() + " already exists");
    }
    const fs::path parent = out_dir.parent_path().empty() ? "." : out_dir.parent_path();
    fs::create_directories(parent, ec);
    if (ec) {
        throw IoError("cannot create parent directory " + parent.string() + ": " + ec.message());
    }

    const json config_json = config_to_json(config);
    const std::string config_hash = string_hash(config_json.dump());

    // Assemble in a scratch directory, then rename into place.
    fs::path partial = out_dir;
    partial += ".partial";
    fs::remove_all(partial, ec);
    fs::create_directories(partial / "diagnostics", ec);
    if (ec) {
        throw IoError("cannot create scratch directory " + partial.string() + ": " + ec.message());
    }

    try {
        write_text_file(partial / "grid.csv", render_grid_csv(grid, config_hash));
        write_text_file(partial / "tables.md", render_tables_md(grid, config_hash));

        json meta;
        meta["config"] = config_json;
        meta["config_hash"] = config_hash;
        meta["inputs"] = {{"rainfall",
                           {{"path", config.rainfall_path}, {"hash", file_hash(config.rainfall_path)}}},
                          {"production",
                           {{"path", config.production_path},
                            {"hash", file_hash(config.production_path)}}}};
        meta["grid"] = {{"order",
                         {{"p", grid.order_used.p},
                          {"d", grid.order_used.d},
                          {"q", grid.order_used.q},
                          {"constant", grid.order_used.include_constant}}},
                        {"train_length", grid.train_length},
                        {"holdout", grid.holdout},
                        {"first_train_year", grid.first_train_year},
                        {"last_train_year", grid.last_train_year},
                        {"test_years", grid.test_years},
                        {"floor_mm", grid.floor_mm},
                        {"rv4_sqrt", grid.rv4_sqrt},
                        {"seed", grid.seed},
                        {"production_hash", to_hex(grid.production_hash)},
                        {"rainfall_hash", to_hex(grid.rainfall_hash)}};
        write_text_file(partial / "run_meta.json", meta.dump(2) + "\n");

        for (const FitRecord& rec : grid.fits) {
            write_text_file(partial / "diagnostics" / (rec.key + ".json"),
                            fit_record_to_json(rec, config_hash).dump(2) + "\n");
        }
    } catch (...) {
        fs::remove_all(partial, ec);
        throw;
    }

    fs::rename(partial, out_dir, ec);
    if (ec) {
        fs::remove_all(partial, ec);
        throw IoError("cannot move bundle into place at " + out_dir.string());
    }

    ReportBundle bundle;
    bundle.directory = out_dir;
    bundle.grid_csv = out_dir / "grid.csv";
    bundle.tables_md = out_dir / "tables.md";
    bundle.run_meta = out_dir / "run_meta.json";
    bundle.diagnostics_dir = out_dir / "diagnostics";
    bundle.config_hash = config_hash;
    return bundle;
}

RunConfig run_config_from_meta(const fs::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in) {
        throw IoError("cannot open " + meta_path.string());
    }
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ValidationError("cannot parse " + meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("config")) {
        throw ValidationError(meta_path.string() + " has no config section");
    }
    const json& c = meta["config"];
    RunConfig config;
    try {
        config.rainfall_path = c.at("rainfall_path").get<std::string>();
        config.production_path = c.at("production_path").get<std::string>();
        config.holdout = c.at("holdout").get<int>();
        config.floor_mm = c.at("floor_mm").get<double>();
        config.rv4_sqrt = c.at("rv4_sqrt").get<bool>();
        config.order_override = c.at("order_override").get<bool>();
        config.p = c.at("p").get<int>();
        config.d = c.at("d").get<int>();
        config.q = c.at("q").get<int>();
        config.max_order = c.at("max_order").get<int>();
        config.include_constant = c.at("include_constant").get<bool>();
        config.garch_r = c.at("garch_r").get<int>();
        config.garch_s = c.at("garch_s").get<int>();
        config.families = c.at("families").get<std::vector<std::string>>();
        config.seed = c.at("seed").get<std::uint64_t>();
        config.threads = c.at("threads").get<int>();
        config.opt_max_evals = c.at("opt_max_evals").get<int>();
        config.opt_tol = c.at("opt_tol").get<double>();
        config.strict = c.at("strict").get<bool>();
    } catch (const json::exception& e) {
        throw ValidationError(meta_path.string() + ": config section incomplete: " + e.what());
    }
    return config;
}

}  // namespace rainrisk
