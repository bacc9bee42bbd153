#include "smpa/reporting.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"

namespace smpa {

using detail::json;

namespace {

std::string substitute_process(std::string text, std::string_view process_name) {
  static constexpr std::string_view kPlaceholder = "{process}";
  for (auto pos = text.find(kPlaceholder); pos != std::string::npos;
       pos = text.find(kPlaceholder, pos + process_name.size())) {
    text.replace(pos, kPlaceholder.size(), process_name);
  }
  return text;
}

std::string fixed4(double v) { return fmt::format("{:.4f}", v); }

std::string fixed4(const std::optional<double>& v) { return v ? fixed4(*v) : std::string("n/a"); }

std::string level_label(CapabilityLevel level) { return fmt::format("CL{}", to_int(level)); }

std::string reliability_label(const AttributeResult& a) {
  if (a.count == 0) return "unassessed";
  if (!a.cv) return "undetermined";
  return a.low_reliability ? "LOW" : "ok";
}

}  // namespace

std::vector<ReportEntry> select_knowledge_items(const ProcessResult& result,
                                                const ContentBank& bank) {
  std::vector<ReportEntry> entries;
  for (const auto& qr : result.questions) {
    const auto* q = bank.find_question(qr.question);
    if (q == nullptr) {
      throw Error(ErrorCode::BankMismatch,
                  fmt::format("question '{}' is unknown to the bank", qr.question));
    }
    if (!qr.band || !qr.knowledge_score ||
        !(*qr.band == RatingBand::N || *qr.band == RatingBand::P)) {
      continue;
    }
    ReportEntry e;
    e.question = qr.question;
    e.process = qr.process;
    e.attribute = q->attribute;
    e.question_text = q->text;
    e.knowledge_score = *qr.knowledge_score;
    e.band = *qr.band;
    const KnowledgeItem* item =
        q->knowledge_item ? bank.find_knowledge_item(*q->knowledge_item) : nullptr;
    if (item != nullptr) {
      e.knowledge_item = item->id;
      e.observation = substitute_process(item->observation, result.process.name);
      e.recommendation = substitute_process(item->recommendation, result.process.name);
    } else {
      e.observation = std::string(kMissingGuidanceObservation);
      e.guidance_missing = true;
    }
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const ReportEntry& a, const ReportEntry& b) {
    if (a.knowledge_score != b.knowledge_score) return a.knowledge_score < b.knowledge_score;
    return a.question < b.question;
  });
  return entries;
}

AssessmentReport compose_report(const Assessment& assessment,
                                const std::vector<ProcessResult>& results,
                                const ContentBank& bank, const MeasurementConfig& config) {
  if (assessment.state != AssessmentState::Closed &&
      assessment.state != AssessmentState::Reported) {
    throw Error(ErrorCode::InvalidState,
                fmt::format("assessment '{}' must be closed before reporting (state {})",
                            assessment.id, to_string(assessment.state)));
  }
  require_same_bank(assessment, bank);

  AssessmentReport report;
  report.assessment_id = assessment.id;
  report.org_profile = assessment.org_profile;
  report.target_level = assessment.target_level;
  report.created_at = assessment.created_at;
  report.opened_at = assessment.opened_at;
  report.closed_at = assessment.closed_at;
  report.bank_fingerprint = assessment.bank_fingerprint;
  report.method = config;

  for (const auto& process : assessment.processes) {
    auto it = std::find_if(results.begin(), results.end(),
                           [&](const ProcessResult& r) { return r.process.id == process; });
    if (it == results.end()) {
      throw Error(ErrorCode::IncompleteResults,
                  fmt::format("no measurement result for process '{}'", process));
    }
    if (it->attributes.size() != kAttributeCount) {
      throw Error(ErrorCode::IncompleteResults,
                  fmt::format("result for '{}' lacks attribute ratings", process));
    }
    ProcessReport pr;
    pr.process = it->process;
    pr.capability_level = it->capability_level;
    pr.attributes = it->attributes;
    pr.entries = select_knowledge_items(*it, bank);
    report.processes.push_back(std::move(pr));
  }
  if (results.size() != assessment.processes.size()) {
    throw Error(ErrorCode::IncompleteResults, "results do not match the assessed processes");
  }
  return report;
}

AssessmentReport build_report(Assessment& assessment, const std::vector<ProcessResult>& results,
                              const ContentBank& bank, std::string now,
                              const MeasurementConfig& config) {
  auto report = compose_report(assessment, results, bank, config);
  mark_reported(assessment, std::move(now));
  return report;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "structured" || text == "json") return ReportFormat::Structured;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  if (text == "html") return ReportFormat::Html;
  throw Error(ErrorCode::UnsupportedFormat, fmt::format("unsupported report format '{}'", text));
}

// --- structured form ------------------------------------------------------

namespace {

json optional_string(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

json entry_to_json(const ReportEntry& e) {
  return json{{"question", e.question},
              {"process", e.process},
              {"attribute", to_string(e.attribute)},
              {"question_text", e.question_text},
              {"knowledge_score", e.knowledge_score},
              {"band", to_string(e.band)},
              {"knowledge_item", optional_string(e.knowledge_item)},
              {"observation", e.observation},
              {"recommendation", optional_string(e.recommendation)},
              {"guidance_missing", e.guidance_missing}};
}

ReportEntry entry_from_json(const json& j, const std::string& path) {
  detail::require_object(j, path);
  ReportEntry e;
  e.question = detail::get_string(j, "question", path);
  e.process = detail::get_string(j, "process", path);
  auto attr_text = detail::get_string(j, "attribute", path);
  auto attribute = parse_attribute(attr_text);
  if (!attribute) {
    throw Error(ErrorCode::ParseError, fmt::format("unknown attribute '{}'", attr_text),
                detail::child_path(path, "attribute"));
  }
  e.attribute = *attribute;
  e.question_text = detail::get_string(j, "question_text", path);
  e.knowledge_score = detail::get_number(j, "knowledge_score", path);
  auto band_text = detail::get_string(j, "band", path);
  auto band = parse_band(band_text);
  if (!band) {
    throw Error(ErrorCode::ParseError, fmt::format("unknown band '{}'", band_text),
                detail::child_path(path, "band"));
  }
  e.band = *band;
  e.knowledge_item = detail::get_optional_string(j, "knowledge_item", path);
  e.observation = detail::get_string(j, "observation", path);
  e.recommendation = detail::get_optional_string(j, "recommendation", path);
  e.guidance_missing = detail::get_bool(j, "guidance_missing", path);
  return e;
}

json summary_json(const AssessmentReport& report) {
  json profile = json::array();
  json top = json::array();
  std::size_t total = 0;
  std::size_t low_reliability = 0;
  for (const auto& p : report.processes) {
    profile.push_back({{"process", p.process.id},
                       {"name", p.process.name},
                       {"capability_level", to_int(p.capability_level)},
                       {"risk_count", p.entries.size()}});
    json risks = json::array();
    for (std::size_t i = 0; i < p.entries.size() && i < kSummaryRisksPerProcess; ++i) {
      risks.push_back({{"question", p.entries[i].question},
                       {"knowledge_score", p.entries[i].knowledge_score},
                       {"band", to_string(p.entries[i].band)}});
    }
    top.push_back({{"process", p.process.id}, {"risks", std::move(risks)}});
    total += p.entries.size();
    for (const auto& a : p.attributes) {
      low_reliability += a.low_reliability ? 1 : 0;
    }
  }
  return json{{"capability_profile", std::move(profile)},
              {"top_risks", std::move(top)},
              {"total_risks", total},
              {"low_reliability_attributes", low_reliability}};
}

}  // namespace

json report_to_json(const AssessmentReport& report) {
  json processes = json::array();
  for (const auto& p : report.processes) {
    json attributes = json::array();
    for (const auto& a : p.attributes) {
      attributes.push_back(to_json(a));
    }
    json entries = json::array();
    for (const auto& e : p.entries) {
      entries.push_back(entry_to_json(e));
    }
    processes.push_back({{"process", {{"id", p.process.id}, {"name", p.process.name}}},
                         {"capability_level", to_int(p.capability_level)},
                         {"attributes", std::move(attributes)},
                         {"entries", std::move(entries)}});
  }
  return json{{"schema_version", report.schema_version},
              {"assessment",
               {{"id", report.assessment_id},
                {"org_profile", report.org_profile},
                {"target_level", to_int(report.target_level)},
                {"created_at", report.created_at},
                {"opened_at", optional_string(report.opened_at)},
                {"closed_at", optional_string(report.closed_at)},
                {"bank_fingerprint", report.bank_fingerprint}}},
              {"method", to_json(report.method)},
              {"summary", summary_json(report)},
              {"processes", std::move(processes)}};
}

AssessmentReport report_from_json(const json& document) {
  detail::require_object(document, "");
  AssessmentReport report;
  report.schema_version = static_cast<int>(detail::get_int(document, "schema_version", ""));
  if (report.schema_version != kReportSchemaVersion) {
    throw Error(ErrorCode::VersionError,
                fmt::format("unsupported report schema_version {}", report.schema_version),
                "schema_version");
  }
  const auto& meta = detail::require_field(document, "assessment", "");
  detail::require_object(meta, "assessment");
  report.assessment_id = detail::get_string(meta, "id", "assessment");
  report.org_profile = detail::get_string(meta, "org_profile", "assessment");
  report.target_level =
      capability_level_from_int(static_cast<int>(detail::get_int(meta, "target_level", "assessment")));
  report.created_at = detail::get_string(meta, "created_at", "assessment");
  report.opened_at = detail::get_optional_string(meta, "opened_at", "assessment");
  report.closed_at = detail::get_optional_string(meta, "closed_at", "assessment");
  report.bank_fingerprint = detail::get_string(meta, "bank_fingerprint", "assessment");
  report.method = measurement_config_from_json(detail::require_field(document, "method", ""));

  const auto& processes = detail::require_array(document, "processes", "");
  for (std::size_t i = 0; i < processes.size(); ++i) {
    const auto path = detail::index_path("processes", i);
    detail::require_object(processes[i], path);
    ProcessReport p;
    const auto& ref = detail::require_field(processes[i], "process", path);
    const auto ref_path = detail::child_path(path, "process");
    p.process = ProcessRef{detail::get_string(ref, "id", ref_path),
                           detail::get_string(ref, "name", ref_path)};
    p.capability_level = capability_level_from_int(
        static_cast<int>(detail::get_int(processes[i], "capability_level", path)));
    const auto& attributes = detail::require_array(processes[i], "attributes", path);
    for (std::size_t k = 0; k < attributes.size(); ++k) {
      p.attributes.push_back(attribute_result_from_json(
          attributes[k], detail::index_path(detail::child_path(path, "attributes"), k)));
    }
    const auto& entries = detail::require_array(processes[i], "entries", path);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      p.entries.push_back(
          entry_from_json(entries[k], detail::index_path(detail::child_path(path, "entries"), k)));
    }
    report.processes.push_back(std::move(p));
  }
  return report;
}

// --- human formats --------------------------------------------------------

namespace {

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Pipes would break a markdown table cell.
std::string md_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::size_t total_entries(const AssessmentReport& report) {
  std::size_t n = 0;
  for (const auto& p : report.processes) n += p.entries.size();
  return n;
}

const AttributeResult* find_attribute(const ProcessReport& p, ProcessAttribute attribute) {
  for (const auto& a : p.attributes) {
    if (a.attribute == attribute) return &a;
  }
  return nullptr;
}

std::string attribute_rating(const ProcessReport& p, ProcessAttribute attribute) {
  const auto* a = find_attribute(p, attribute);
  return a ? std::string(rating_to_string(a->rating)) : std::string("-");
}

std::string method_line_percents(const MeasurementConfig& m) {
  return fmt::format("N = {}, P = {}, L = {}, F = {}", m.scale.answer_percent[0],
                     m.scale.answer_percent[1], m.scale.answer_percent[2],
                     m.scale.answer_percent[3]);
}

std::string method_line_bands(const MeasurementConfig& m) {
  return fmt::format("N [0, {}], P ({}, {}], L ({}, {}], F ({}, 100]", m.scale.band_upper[0],
                     m.scale.band_upper[0], m.scale.band_upper[1], m.scale.band_upper[1],
                     m.scale.band_upper[2], m.scale.band_upper[2]);
}

std::string render_markdown(const AssessmentReport& r) {
  std::string out;
  auto line = [&out](std::string_view s = {}) {
    out += s;
    out += '\n';
  };

  line(fmt::format("# Process Assessment Report: {}", r.assessment_id));
  line();
  line(fmt::format("- Organisation: {}", r.org_profile));
  line(fmt::format("- Target capability level: {}", level_label(r.target_level)));
  line(fmt::format("- Created: {}", r.created_at));
  line(fmt::format("- Opened: {}", r.opened_at.value_or("-")));
  line(fmt::format("- Closed: {}", r.closed_at.value_or("-")));
  line();

  line("## Summary");
  line();
  line("| Process | Capability level | Risks |");
  line("|---|---|---|");
  for (const auto& p : r.processes) {
    line(fmt::format("| {} | {} | {} |", md_cell(p.process.name), level_label(p.capability_level),
                     p.entries.size()));
  }
  line();
  if (total_entries(r) > 0) {
    line(fmt::format("Top {} risks per process:", kSummaryRisksPerProcess));
    line();
    for (const auto& p : r.processes) {
      if (p.entries.empty()) continue;
      line(fmt::format("**{}**", p.process.name));
      line();
      for (std::size_t i = 0; i < p.entries.size() && i < kSummaryRisksPerProcess; ++i) {
        const auto& e = p.entries[i];
        line(fmt::format("{}. {} ({}, {} {})", i + 1, e.question_text, e.question,
                         to_string(e.band), fixed4(e.knowledge_score)));
      }
      line();
    }
  } else {
    line("No risks identified.");
    line();
  }

  line("## Capability Profile");
  line();
  {
    std::string header = "| Process | Level |";
    std::string rule = "|---|---|";
    for (auto attribute : kAllAttributes) {
      header += fmt::format(" {} |", to_string(attribute));
      rule += "---|";
    }
    line(header);
    line(rule);
    for (const auto& p : r.processes) {
      std::string row =
          fmt::format("| {} | {} |", md_cell(p.process.name), level_label(p.capability_level));
      for (auto attribute : kAllAttributes) {
        row += fmt::format(" {} |", attribute_rating(p, attribute));
      }
      line(row);
    }
  }
  line();

  line("## Per-Attribute Tables");
  line();
  for (const auto& p : r.processes) {
    line(fmt::format("### {} ({})", p.process.name, p.process.id));
    line();
    line("| Attribute | Responses | Mean % | Rating | CV | Reliability |");
    line("|---|---|---|---|---|---|");
    for (const auto& a : p.attributes) {
      line(fmt::format("| {} | {} | {} | {} | {} | {} |", to_string(a.attribute), a.count,
                       fixed4(a.mean_percent), rating_to_string(a.rating), fixed4(a.cv),
                       reliability_label(a)));
    }
    line();
  }

  if (total_entries(r) > 0) {
    line("## Improvement Recommendations");
    line();
    for (const auto& p : r.processes) {
      if (p.entries.empty()) continue;
      line(fmt::format("### {} ({})", p.process.name, p.process.id));
      line();
      for (const auto& e : p.entries) {
        line(fmt::format("#### {}: {}", e.question, e.question_text));
        line();
        line(fmt::format("- Attribute: {}", to_string(e.attribute)));
        line(fmt::format("- Knowledge score: {} ({})", fixed4(e.knowledge_score),
                         to_string(e.band)));
        line(fmt::format("- Observation: {}", e.observation));
        if (e.recommendation) {
          line(fmt::format("- Recommendation: {}", *e.recommendation));
        } else {
          line("- Recommendation: none available in the knowledge base");
        }
        line();
      }
    }
  }

  line("## Method Notes");
  line();
  line(fmt::format("- Answer percentages: {}; Unable is excluded from scoring.",
                   method_line_percents(r.method)));
  line(fmt::format("- Rating bands: {}.", method_line_bands(r.method)));
  line("- Attribute scores are the arithmetic mean of all pooled responses.");
  line(fmt::format("- Reliability: coefficient of variation (population) above {} is flagged LOW.",
                   r.method.cv_threshold));
  line("- A capability level is achieved when its attributes are rated F or L and all lower "
       "attributes are rated F.");
  line(fmt::format("- Bank fingerprint: {}", r.bank_fingerprint));
  return out;
}

std::string render_html(const AssessmentReport& r) {
  std::string out;
  auto line = [&out](std::string_view s) {
    out += s;
    out += '\n';
  };
  auto esc = [](std::string_view s) { return html_escape(s); };

  line("<!DOCTYPE html>");
  line("<html lang=\"en\">");
  line("<head>");
  line("<meta charset=\"utf-8\">");
  line(fmt::format("<title>Process Assessment Report: {}</title>", esc(r.assessment_id)));
  line("</head>");
  line("<body>");
  line(fmt::format("<h1>Process Assessment Report: {}</h1>", esc(r.assessment_id)));
  line("<ul>");
  line(fmt::format("<li>Organisation: {}</li>", esc(r.org_profile)));
  line(fmt::format("<li>Target capability level: {}</li>", level_label(r.target_level)));
  line(fmt::format("<li>Created: {}</li>", esc(r.created_at)));
  line(fmt::format("<li>Opened: {}</li>", esc(r.opened_at.value_or("-"))));
  line(fmt::format("<li>Closed: {}</li>", esc(r.closed_at.value_or("-"))));
  line("</ul>");

  line("<section id=\"summary\">");
  line("<h2>Summary</h2>");
  line("<table>");
  line("<tr><th>Process</th><th>Capability level</th><th>Risks</th></tr>");
  for (const auto& p : r.processes) {
    line(fmt::format("<tr><td>{}</td><td>{}</td><td>{}</td></tr>", esc(p.process.name),
                     level_label(p.capability_level), p.entries.size()));
  }
  line("</table>");
  if (total_entries(r) > 0) {
    for (const auto& p : r.processes) {
      if (p.entries.empty()) continue;
      line(fmt::format("<h3>Top risks: {}</h3>", esc(p.process.name)));
      line("<ol>");
      for (std::size_t i = 0; i < p.entries.size() && i < kSummaryRisksPerProcess; ++i) {
        const auto& e = p.entries[i];
        line(fmt::format("<li>{} ({}, {} {})</li>", esc(e.question_text), esc(e.question),
                         to_string(e.band), fixed4(e.knowledge_score)));
      }
      line("</ol>");
    }
  } else {
    line("<p>No risks identified.</p>");
  }
  line("</section>");

  line("<section id=\"capability-profile\">");
  line("<h2>Capability Profile</h2>");
  line("<table>");
  {
    std::string header = "<tr><th>Process</th><th>Level</th>";
    for (auto attribute : kAllAttributes) {
      header += fmt::format("<th>{}</th>", to_string(attribute));
    }
    header += "</tr>";
    line(header);
  }
  for (const auto& p : r.processes) {
    std::string row = fmt::format("<tr><td>{}</td><td>{}</td>", esc(p.process.name),
                                  level_label(p.capability_level));
    for (auto attribute : kAllAttributes) {
      row += fmt::format("<td>{}</td>", attribute_rating(p, attribute));
    }
    row += "</tr>";
    line(row);
  }
  line("</table>");
  line("</section>");

  line("<section id=\"attributes\">");
  line("<h2>Per-Attribute Tables</h2>");
  for (const auto& p : r.processes) {
    line(fmt::format("<h3>{} ({})</h3>", esc(p.process.name), esc(p.process.id)));
    line("<table>");
    line("<tr><th>Attribute</th><th>Responses</th><th>Mean %</th><th>Rating</th><th>CV</th>"
         "<th>Reliability</th></tr>");
    for (const auto& a : p.attributes) {
      line(fmt::format("<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                       to_string(a.attribute), a.count, fixed4(a.mean_percent),
                       rating_to_string(a.rating), fixed4(a.cv), reliability_label(a)));
    }
    line("</table>");
  }
  line("</section>");

  if (total_entries(r) > 0) {
    line("<section id=\"recommendations\">");
    line("<h2>Improvement Recommendations</h2>");
    for (const auto& p : r.processes) {
      if (p.entries.empty()) continue;
      line(fmt::format("<h3>{} ({})</h3>", esc(p.process.name), esc(p.process.id)));
      for (const auto& e : p.entries) {
        line("<article>");
        line(fmt::format("<h4>{}: {}</h4>", esc(e.question), esc(e.question_text)));
        line("<ul>");
        line(fmt::format("<li>Attribute: {}</li>", to_string(e.attribute)));
        line(fmt::format("<li>Knowledge score: {} ({})</li>", fixed4(e.knowledge_score),
                         to_string(e.band)));
        line(fmt::format("<li>Observation: {}</li>", esc(e.observation)));
        line(fmt::format("<li>Recommendation: {}</li>",
                         e.recommendation ? esc(*e.recommendation)
                                          : std::string("none available in the knowledge base")));
        line("</ul>");
        line("</article>");
      }
    }
    line("</section>");
  }

  line("<section id=\"method\">");
  line("<h2>Method Notes</h2>");
  line("<ul>");
  line(fmt::format("<li>Answer percentages: {}; Unable is excluded from scoring.</li>",
                   method_line_percents(r.method)));
  line(fmt::format("<li>Rating bands: {}.</li>", esc(method_line_bands(r.method))));
  line("<li>Attribute scores are the arithmetic mean of all pooled responses.</li>");
  line(fmt::format(
      "<li>Reliability: coefficient of variation (population) above {} is flagged LOW.</li>",
      r.method.cv_threshold));
  line("<li>A capability level is achieved when its attributes are rated F or L and all lower "
       "attributes are rated F.</li>");
  line(fmt::format("<li>Bank fingerprint: {}</li>", esc(r.bank_fingerprint)));
  line("</ul>");
  line("</section>");
  line("</body>");
  line("</html>");
  return out;
}

}  // namespace

std::string render_report(const AssessmentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Structured:
      return report_to_json(report).dump(2) + "\n";
    case ReportFormat::Markdown:
      return render_markdown(report);
    case ReportFormat::Html:
      return render_html(report);
  }
  throw Error(ErrorCode::UnsupportedFormat, "unsupported report format");
}

}  // namespace smpa
