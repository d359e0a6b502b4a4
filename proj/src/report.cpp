#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "sarcbench/errors.hpp"
#include "sarcbench/experiments.hpp"
#include "sarcbench/utf8.hpp"

namespace sarc {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMissing = "—";
constexpr int kAccDecimalsLlm = 4;
constexpr int kAccDecimalsClassifier = 5;
constexpr int kF1Decimals = 2;

constexpr StrategyId kStrategyOrder[] = {StrategyId::NoFt, StrategyId::FtEnSarc, StrategyId::FtCmSarc,
                                         StrategyId::FtEnSent, StrategyId::FtCmSent};

std::size_t display_width(std::string_view s) { return utf8::decode(s).size(); }

std::string pad(std::string_view s, std::size_t width) {
    return std::string(s) + std::string(width - std::min(width, display_width(s)), ' ');
}

// Columns separated by " | ", every column padded to its widest cell.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], display_width(row[c]));
        }
    }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < widths.size(); ++c) {
            const std::string cell = c < rows[r].size() ? rows[r][c] : "";
            line += (c == 0 ? "" : " | ") + (c + 1 == widths.size() ? cell : pad(cell, widths[c]));
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        out += line + "\n";
        if (r == 1 || (rows.size() == 1 && r == 0)) {
            std::string rule;
            for (std::size_t c = 0; c < widths.size(); ++c) {
                rule += (c == 0 ? "" : "-+-") + std::string(widths[c], '-');
            }
            out += rule + "\n";
        }
    }
    return out;
}

std::string test_label(const std::string& split_name) {
    const std::string lang = split_name.rfind("cm-", 0) == 0 ? "Code-mixed" : "English";
    return lang + " [Sarcasm]";
}

std::string finetune_label(StrategyId id) {
    switch (id) {
        case StrategyId::NoFt: return "No fine-tune";
        case StrategyId::FtEnSarc: return "English [Sarcasm]";
        case StrategyId::FtCmSarc: return "Code-mixed [Sarcasm]";
        case StrategyId::FtEnSent: return "English [Sentiment]";
        case StrategyId::FtCmSent: return "Code-mixed [Sentiment]";
    }
    return "?";
}

// First ok result per strategy, in input order.
std::map<std::string, const ExperimentResult*> primary_strategy_results(const std::vector<ExperimentResult>& rs) {
    std::map<std::string, const ExperimentResult*> out;
    for (const auto& r : rs) {
        const auto id = r.coordinates.value("strategy", std::string());
        if (!id.empty() && !out.contains(id)) {
            out[id] = &r;
        }
    }
    return out;
}

const ExperimentResult* find_llm_cell(const std::vector<ExperimentResult>& cells, const std::string& model,
                                      std::string_view mode, std::string_view lang) {
    for (const auto& c : cells) {
        if (c.coordinates.value("model", std::string()) == model &&
            c.coordinates.value("mode", std::string()) == mode && c.coordinates.value("lang", std::string()) == lang) {
            return &c;
        }
    }
    return nullptr;
}

std::string table4(const ReportInputs& in) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"", "Zero-Shot", "", "", "", "Few-Shot", "", "", ""});
    rows.push_back({"Models", "EN Accuracy", "EN F1", "CM Accuracy", "CM F1", "EN Accuracy", "EN F1", "CM Accuracy",
                    "CM F1"});
    std::vector<LlmModel> models = in.models;
    if (models.empty()) {
        std::set<std::string> seen;
        for (const auto& c : in.llm_cells) {
            const auto id = c.coordinates.value("model", std::string());
            if (seen.insert(id).second) {
                models.push_back({id, c.coordinates.value("model_label", id)});
            }
        }
    }
    for (const auto& m : models) {
        std::vector<std::string> row{m.label.empty() ? m.id : m.label};
        for (const char* mode : {"zero-shot", "few-shot"}) {
            for (const char* lang : {"en", "hinglish"}) {
                const auto* cell = find_llm_cell(in.llm_cells, m.id, mode, lang);
                if (cell != nullptr && cell->ok && cell->metrics) {
                    row.push_back(format_fixed(cell->metrics->accuracy, kAccDecimalsLlm));
                    row.push_back(format_fixed(cell->metrics->macro_f1, kF1Decimals));
                } else {
                    row.emplace_back(kMissing);
                    row.emplace_back(kMissing);
                }
            }
        }
        rows.push_back(std::move(row));
    }
    return "LLM performance for sarcasm detection (accuracy, macro-F1)\n\n" + render_table(rows);
}

std::map<std::string, std::vector<const ExperimentResult*>> runs_by_strategy(const std::vector<ExperimentResult>& rs) {
    std::map<std::string, std::vector<const ExperimentResult*>> out;
    for (const auto& r : rs) {
        if (r.ok && r.metrics && r.metrics->auprc) {
            out[r.coordinates.value("strategy", std::string())].push_back(&r);
        }
    }
    return out;
}

std::string table5(const ReportInputs& in) {
    const auto primary = primary_strategy_results(in.strategies);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Classifier strategies", "", "", "", ""});
    rows.push_back({"Strategy", "Fine-tuning data", "Testing data", "Accuracy", "F1 Score"});
    for (auto id : kStrategyOrder) {
        const std::string key(to_string(id));
        const auto it = primary.find(key);
        const ExperimentResult* r = it == primary.end() ? nullptr : it->second;
        std::vector<std::string> row{key, finetune_label(id)};
        row.push_back(r != nullptr ? test_label(r->test_split) : std::string(kMissing));
        if (r != nullptr && r->ok && r->metrics) {
            row.push_back(format_fixed(r->metrics->accuracy, kAccDecimalsClassifier));
            row.push_back(format_fixed(r->metrics->macro_f1, kF1Decimals));
        } else {
            row.emplace_back(kMissing);
            row.emplace_back(kMissing);
        }
        rows.push_back(std::move(row));
    }
    std::string out = render_table(rows);
    const auto runs = runs_by_strategy(in.strategies);
    if (!runs.empty()) {
        out += "\nMean AUPRC over runs\n";
        for (auto id : kStrategyOrder) {
            const auto it = runs.find(std::string(to_string(id)));
            if (it == runs.end()) {
                continue;
            }
            double sum = 0.0;
            for (const auto* r : it->second) {
                sum += *r->metrics->auprc;
            }
            out += fmt::format("{}: {} ({} runs)\n", it->first,
                               format_fixed(sum / static_cast<double>(it->second.size()), 4), it->second.size());
        }
    }
    return out;
}

struct Series {
    std::string name;
    std::string colour;
    std::vector<std::pair<double, double>> points;
};

std::string svg_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series, double x_min, double x_max, double y_min, double y_max,
                      bool steps) {
    constexpr double W = 640, H = 440, L = 70, R = 190, T = 40, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    const auto sx = [&](double x) { return L + (x_max > x_min ? (x - x_min) / (x_max - x_min) : 0.0) * pw; };
    const auto sy = [&](double y) { return T + ph - (y_max > y_min ? (y - y_min) / (y_max - y_min) : 0.0) * ph; };
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        W, H);
    s += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", L + pw / 2,
                     title);
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                     L, T, pw, ph);
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        const bool big = std::abs(x_max) >= 100;
        s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>\n",
                         sx(fx), T, T + ph);
        s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>\n", L,
                         sy(fy), L + pw);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", sx(fx), T + ph + 18,
                         big ? fmt::format("{:.0f}", fx) : fmt::format("{:.1f}", fx));
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", L - 6, sy(fy) + 4, fy);
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", L + pw / 2, H - 18,
                     x_label);
    s += fmt::format(
        "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
        T + ph / 2, y_label);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& se = series[i];
        std::string pts;
        double prev_y = 0.0;
        for (std::size_t j = 0; j < se.points.size(); ++j) {
            const auto [x, y] = se.points[j];
            if (steps && j > 0) {
                pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(prev_y));
            }
            pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(y));
            prev_y = y;
        }
        if (!pts.empty()) {
            pts.pop_back();
        }
        s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", se.colour,
                         pts);
        if (!steps) {
            for (const auto& [x, y] : se.points) {
                s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", sx(x), sy(y),
                                 se.colour);
            }
        }
        const double ly = T + 10 + 18.0 * static_cast<double>(i);
        s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                         "stroke-width=\"2\"/>\n",
                         L + pw + 12, ly, L + pw + 32, se.colour);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", L + pw + 38, ly + 4, se.name);
    }
    s += "</svg>\n";
    return s;
}

std::string strategy_colour(const std::string& id) {
    static const std::map<std::string, std::string> base{{"FT_CM_SARC", "#d62728"}, {"FT_EN_SARC", "#1f77b4"},
                                                         {"NO_FT", "#7f7f7f"},      {"FT_EN_SENT", "#2ca02c"},
                                                         {"FT_CM_SENT", "#9467bd"}};
    const auto it = base.find(id);
    return it == base.end() ? "#000000" : it->second;
}

json reference_comparison(const ReportInputs& in) {
    json out = json::object();
    if (!in.reference_targets) {
        return out;
    }
    const auto& ref = *in.reference_targets;
    const auto add = [&](const std::string& cell, const MetricsSummary& m, const json& target) {
        json row{{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
        if (target.contains("accuracy")) {
            row["published_accuracy"] = target["accuracy"];
            row["accuracy_delta"] = m.accuracy - target["accuracy"].get<double>();
        }
        if (target.contains("f1")) {
            row["published_f1"] = target["f1"];
            row["f1_delta"] = m.macro_f1 - target["f1"].get<double>();
        }
        out[cell] = row;
    };
    for (const auto& [id, r] : primary_strategy_results(in.strategies)) {
        if (r->ok && r->metrics && ref.contains("table5") && ref["table5"].contains(id)) {
            add(r->cell_id, *r->metrics, ref["table5"][id]);
        }
    }
    for (const auto& c : in.llm_cells) {
        if (!c.ok || !c.metrics || !ref.contains("table4")) {
            continue;
        }
        const auto& t4 = ref["table4"];
        const auto model = c.coordinates.value("model", std::string());
        const auto mode = c.coordinates.value("mode", std::string());
        const auto lang = c.coordinates.value("lang", std::string());
        if (t4.contains(model) && t4[model].contains(mode) && t4[model][mode].contains(lang)) {
            add(c.cell_id, *c.metrics, t4[model][mode][lang]);
        }
    }
    return out;
}

}  // namespace

std::string format_fixed(double value, int decimals) { return fmt::format("{:.{}f}", value, decimals); }

std::vector<fs::path> emit_report(const ReportInputs& in, const fs::path& out_dir) {
    if (in.strategies.empty() && in.llm_cells.empty() && in.ablations.empty()) {
        throw UsageError("nothing to report: no results");
    }
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    const auto put = [&](const std::string& name, const std::string& content) {
        write_text_file(out_dir / name, content);
        written.push_back(out_dir / name);
    };

    if (!in.llm_cells.empty()) {
        put("table4_llm.txt", table4(in));
    }
    if (!in.strategies.empty()) {
        put("table5_classifier.txt", table5(in));
    }

    json metrics = json::object();
    json cells = json::object();
    for (const auto* group : {&in.strategies, &in.llm_cells}) {
        for (const auto& r : *group) {
            json j = r.to_json();
            j.erase("artifacts");
            cells[r.cell_id] = j;
        }
    }
    metrics["cells"] = cells;
    json auprc = json::object();
    for (const auto& [id, runs] : runs_by_strategy(in.strategies)) {
        double sum = 0.0;
        json per_run = json::array();
        for (const auto* r : runs) {
            sum += *r->metrics->auprc;
            per_run.push_back({{"seed", r->seed}, {"auprc", *r->metrics->auprc}});
        }
        auprc[id] = {{"mean", sum / static_cast<double>(runs.size())}, {"runs", per_run}};
    }
    metrics["auprc"] = auprc;
    json abl = json::array();
    for (const auto& p : in.ablations) {
        abl.push_back(p.to_json());
    }
    metrics["ablation"] = abl;
    metrics["comparisons"] = in.comparisons;
    metrics["reference"] = reference_comparison(in);
    put("metrics.json", metrics.dump(2) + "\n");

    // PR curves
    std::string pr_csv = "strategy,seed,threshold,recall,precision\n";
    std::vector<Series> pr_series;
    for (const auto& r : in.strategies) {
        if (!r.ok || !r.pr) {
            continue;
        }
        const auto id = r.coordinates.value("strategy", std::string());
        Series se{fmt::format("{} seed {} ({})", id, r.seed, format_fixed(r.pr->auprc, 4)),
                  strategy_colour(id),
                  {}};
        se.points.emplace_back(0.0, r.pr->points.empty() ? 1.0 : r.pr->points.front().precision);
        for (const auto& p : r.pr->points) {
            pr_csv += fmt::format("{},{},{:.9g},{:.9g},{:.9g}\n", id, r.seed, p.threshold, p.recall, p.precision);
            se.points.emplace_back(p.recall, p.precision);
        }
        pr_series.push_back(std::move(se));
    }
    if (!pr_series.empty()) {
        put("pr_curves.csv", pr_csv);
        put("pr_curves.svg", svg_chart("Precision-recall on the test split", "Recall", "Precision", pr_series, 0.0,
                                       1.0, 0.0, 1.0, true));
    }

    // Ablation curves
    if (!in.ablations.empty()) {
        std::string csv = "strategy,train_size,accuracy,macro_f1\n";
        std::map<std::string, std::vector<AblationPoint>> by_strategy;
        for (const auto& p : in.ablations) {
            csv += fmt::format("{},{},{:.9g},{:.9g}\n", p.strategy, p.train_size, p.accuracy, p.macro_f1);
            by_strategy[p.strategy].push_back(p);
        }
        put("ablation.csv", csv);
        for (const auto& [id, pts] : by_strategy) {
            Series acc{"Accuracy", "#1f77b4", {}};
            Series f1{"Macro-F1", "#ff7f0e", {}};
            double x_max = 0.0;
            for (const auto& p : pts) {
                acc.points.emplace_back(static_cast<double>(p.train_size), p.accuracy);
                f1.points.emplace_back(static_cast<double>(p.train_size), p.macro_f1);
                x_max = std::max(x_max, static_cast<double>(p.train_size));
            }
            put("ablation_" + id + ".svg", svg_chart("Training size vs performance (" + id + ")", "Training size",
                                                     "Score", {acc, f1}, 0.0, x_max, 0.0, 1.0, false));
        }
    }

    // Misclassified sentences of the best strategy.
    const ExperimentResult* best = nullptr;
    const auto primary = primary_strategy_results(in.strategies);
    for (auto id : kStrategyOrder) {
        const auto it = primary.find(std::string(to_string(id)));
        if (it == primary.end() || !it->second->ok || !it->second->metrics || !it->second->predictions) {
            continue;
        }
        if (best == nullptr || it->second->metrics->accuracy > best->metrics->accuracy) {
            best = it->second;
        }
    }
    if (best != nullptr && in.splits != nullptr) {
        const auto& gold = require_split(*in.splits, best->test_split);
        std::map<std::string, const PredictionEntry*> by_id;
        for (const auto& e : best->predictions->entries) {
            by_id[e.sentence_id] = &e;
        }
        std::string csv = "cell_id,id,text,gold,predicted,score\n";
        for (const auto& rec : gold.records) {
            const auto it = by_id.find(rec.id);
            if (it == by_id.end()) {
                continue;
            }
            const auto& e = *it->second;
            if (e.status == PredictionStatus::Ok && e.predicted == rec.label) {
                continue;
            }
            csv += csv_escape(best->cell_id) + "," + csv_escape(rec.id) + "," + csv_escape(rec.text) + "," +
                   std::string(to_string(rec.label)) + "," +
                   (e.predicted ? std::string(to_string(*e.predicted)) : std::string(to_string(e.status))) + "," +
                   (e.score ? fmt::format("{:.6f}", *e.score) : std::string()) + "\n";
        }
        put("misclassified.csv", csv);
    }
    return written;
}

}  // namespace sarc
