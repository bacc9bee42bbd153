// smpa: administrator command line for banks, process selection, offline
// assessments, simulation, measurement, reports and the HTTP service.
//
// Exit codes: 0 success, 1 domain/validation failure, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "smpa/bank.hpp"
#include "smpa/error.hpp"
#include "smpa/measurement.hpp"
#include "smpa/reporting.hpp"
#include "smpa/selection.hpp"
#include "smpa/service.hpp"
#include "smpa/simulation.hpp"
#include "smpa/store.hpp"
#include "smpa/survey.hpp"

namespace {

using nlohmann::json;
using smpa::Error;
using smpa::ErrorCode;

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value != nullptr && *value != '\0' ? std::string(value) : std::move(fallback);
}

struct Globals {
  std::string data_dir = env_or("DATA_DIR", "smpa-data");
  std::string bank_path = env_or("BANK_PATH", "");
  std::string now = env_or("SMPA_NOW", "");
  std::string output = "text";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what(), path);
  }
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  }
  out << contents;
}

bool structured(const Globals& g) { return g.output == "structured" || g.output == "json"; }

std::shared_ptr<const smpa::ContentBank> load_bank(const Globals& g) {
  if (g.bank_path.empty()) {
    throw Error(ErrorCode::ValidationError, "no bank given (use --bank or BANK_PATH)");
  }
  return std::make_shared<const smpa::ContentBank>(smpa::ContentBank::load_file(g.bank_path));
}

std::unique_ptr<smpa::Store> open_store(const Globals& g) {
  smpa::Clock clock = smpa::utc_now;
  if (!g.now.empty()) {
    clock = [now = g.now] { return now; };
  }
  return std::make_unique<smpa::Store>(g.data_dir, load_bank(g), std::move(clock));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

smpa::Assignment parse_assignment(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::ValidationError,
                fmt::format("assignment '{}' must look like PROCESS:Role", text));
  }
  auto role = smpa::parse_role(text.substr(colon + 1));
  if (!role) {
    throw Error(ErrorCode::ValidationError, fmt::format("unknown role in '{}'", text));
  }
  return smpa::Assignment{text.substr(0, colon), *role};
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

// --- bank ---------------------------------------------------------------

void print_stats(const smpa::BankStats& s) {
  fmt::print("processes:                  {}\n", s.processes);
  fmt::print("questions:                  {}\n", s.total_questions);
  fmt::print("  process-specific (PA1.1): {}\n", s.process_specific);
  fmt::print("  generic (PA2.1-PA5.2):    {}\n", s.generic);
  fmt::print("knowledge items:            {}\n", s.knowledge_items);
  fmt::print("questions with items:       {}\n", s.questions_with_items);
  fmt::print("questions without items:    {}\n", s.questions_without_items);
  fmt::print("per process:\n");
  for (const auto& [id, n] : s.per_process) fmt::print("  {:<8} {}\n", id, n);
  fmt::print("per attribute:\n");
  for (auto a : smpa::kAllAttributes) {
    fmt::print("  {:<8} {}\n", smpa::to_string(a), s.per_attribute[smpa::index_of(a)]);
  }
  fmt::print("per role:\n");
  for (auto r : smpa::kAllRoles) {
    fmt::print("  {:<20} {}\n", smpa::to_string(r), s.per_role[static_cast<std::size_t>(r)]);
  }
  if (!s.missing_items.empty()) {
    fmt::print("questions lacking knowledge items:\n");
    for (const auto& id : s.missing_items) fmt::print("  {}\n", id);
  }
}

// --- measurement output -----------------------------------------------------

void print_results(const std::vector<smpa::ProcessResult>& results) {
  for (const auto& r : results) {
    fmt::print("{} ({}): CL{}\n", r.process.name, r.process.id, smpa::to_int(r.capability_level));
    fmt::print("  {:<6} {:>6} {:>10} {:>10} {:>8} {}\n", "attr", "count", "mean %", "rating", "cv",
               "reliability");
    for (const auto& a : r.attributes) {
      fmt::print("  {:<6} {:>6} {:>10} {:>10} {:>8} {}\n", smpa::to_string(a.attribute), a.count,
                 fmt_optional(a.mean_percent), smpa::rating_to_string(a.rating), fmt_optional(a.cv),
                 a.count == 0 ? "unassessed" : (!a.cv ? "undetermined" : (a.low_reliability ? "LOW" : "ok")));
    }
  }
}

// --- serve ----------------------------------------------------------------

smpa::Service* g_service = nullptr;

extern "C" void handle_signal(int) {
  if (g_service != nullptr) {
    g_service->stop();
  }
}

int usage_exit(const CLI::App& app, const CLI::Error& e) {
  if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
    app.exit(e);
    return 0;
  }
  app.exit(e);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-assessment of IT service management process capability"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Store directory (env DATA_DIR)");
  app.add_option("--bank", g.bank_path, "Content bank file (env BANK_PATH)");
  app.add_option("--now", g.now, "Pin the clock to this UTC timestamp (env SMPA_NOW)");
  app.add_option("--output", g.output, "text or structured")
      ->check(CLI::IsMember({"text", "structured", "json"}));

  std::function<void()> action;

  // bank
  auto* bank_cmd = app.add_subcommand("bank", "Validate or summarise a content bank");
  bank_cmd->require_subcommand(1);
  std::string bank_file;
  auto* bank_validate = bank_cmd->add_subcommand("validate", "Validate a bank file");
  bank_validate->add_option("path", bank_file, "Bank file")->required();
  bank_validate->callback([&] {
    action = [&] {
      auto bank = smpa::ContentBank::load_file(bank_file);
      fmt::print("ok: {} processes, {} questions, {} knowledge items (fingerprint {})\n",
                 bank.processes().size(), bank.questions().size(), bank.knowledge_items().size(),
                 bank.fingerprint());
    };
  });
  auto* bank_stats_cmd = bank_cmd->add_subcommand("stats", "Print bank counts");
  bank_stats_cmd->add_option("path", bank_file, "Bank file")->required();
  bank_stats_cmd->callback([&] {
    action = [&] {
      auto stats = smpa::bank_stats(smpa::ContentBank::load_file(bank_file));
      if (structured(g)) {
        std::cout << smpa::to_json(stats).dump(2) << '\n';
      } else {
        print_stats(stats);
      }
    };
  });

  // select
  auto* select_cmd = app.add_subcommand("select", "Rank candidate processes for assessment");
  std::string select_input;
  std::string weights_text = "0.5,0.5";
  std::size_t top = 0;
  select_cmd->add_option("--input", select_input, "Ratings file")->required();
  select_cmd->add_option("--weights", weights_text, "importance,gap weights summing to 1");
  select_cmd->add_option("--top", top, "Show only the first k processes");
  select_cmd->callback([&] {
    action = [&] {
      auto parts = split(weights_text, ',');
      if (parts.size() != 2) {
        throw Error(ErrorCode::InvalidWeights, "--weights expects two comma-separated numbers");
      }
      smpa::SelectionWeights w;
      try {
        w = {std::stod(parts[0]), std::stod(parts[1])};
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidWeights, fmt::format("bad weights '{}'", weights_text));
      }
      auto input = smpa::parse_selection_input(read_json_file(select_input));
      auto scores = smpa::score_processes(input.drivers, input.gaps, w);
      if (top > 0 && scores.size() > top) scores.resize(top);
      if (structured(g)) {
        std::cout << smpa::to_json(scores).dump(2) << '\n';
        return;
      }
      fmt::print("{:>4}  {:<12} {:>10} {:>8} {:>9}\n", "rank", "process", "importance", "gap",
                 "combined");
      for (const auto& s : scores) {
        fmt::print("{:>4}  {:<12} {:>10.4f} {:>8.4f} {:>9.4f}\n", s.rank, s.process,
                   s.importance_norm, s.gap_norm, s.combined);
      }
    };
  });

  // assessment
  auto* assessment_cmd = app.add_subcommand("assessment", "Manage offline assessments");
  assessment_cmd->require_subcommand(1);
  std::string assessment_id;
  std::string processes_text;
  std::string org_profile;
  int target = 5;
  auto* create_cmd = assessment_cmd->add_subcommand("create", "Create a Draft assessment");
  create_cmd->add_option("--processes", processes_text, "Comma-separated process ids")->required();
  create_cmd->add_option("--org", org_profile, "Organisation context");
  create_cmd->add_option("--target", target, "Target capability level 1..5")
      ->check(CLI::Range(1, 5));
  create_cmd->add_option("--id", assessment_id, "Assessment id (random when omitted)");
  create_cmd->callback([&] {
    action = [&] {
      auto store = open_store(g);
      auto a = store->create(assessment_id, org_profile, split(processes_text, ','),
                             smpa::capability_level_from_int(target));
      if (structured(g)) {
        std::cout << smpa::assessment_summary_json(a).dump(2) << '\n';
      } else {
        fmt::print("{}\n", a.id);
      }
    };
  });
  auto* open_cmd = assessment_cmd->add_subcommand("open", "Open an assessment for responses");
  open_cmd->add_option("id", assessment_id)->required();
  open_cmd->callback([&] { action = [&] { open_store(g)->open(assessment_id); }; });
  auto* close_cmd = assessment_cmd->add_subcommand("close", "Close an assessment");
  close_cmd->add_option("id", assessment_id)->required();
  close_cmd->callback([&] { action = [&] { open_store(g)->close(assessment_id); }; });
  auto* show_cmd = assessment_cmd->add_subcommand("show", "Show assessment metadata");
  show_cmd->add_option("id", assessment_id)->required();
  show_cmd->callback([&] {
    action = [&] {
      std::cout << smpa::assessment_summary_json(open_store(g)->get(assessment_id)).dump(2) << '\n';
    };
  });
  auto* list_cmd = assessment_cmd->add_subcommand("list", "List assessments");
  list_cmd->callback([&] {
    action = [&] {
      auto store = open_store(g);
      for (const auto& id : store->assessment_ids()) {
        const auto a = store->get(id);
        fmt::print("{}\t{}\t{}\n", id, smpa::to_string(a.state), a.org_profile);
      }
    };
  });

  // participant
  auto* participant_cmd = app.add_subcommand("participant", "Manage participants");
  participant_cmd->require_subcommand(1);
  std::string display_name;
  std::vector<std::string> assignment_texts;
  auto* register_cmd = participant_cmd->add_subcommand("register", "Register a participant");
  register_cmd->add_option("id", assessment_id, "Assessment id")->required();
  register_cmd->add_option("--name", display_name, "Display name")->required();
  register_cmd->add_option("--assign", assignment_texts, "PROCESS:Role (repeatable)")->required();
  register_cmd->callback([&] {
    action = [&] {
      std::vector<smpa::Assignment> assignments;
      for (const auto& t : assignment_texts) assignments.push_back(parse_assignment(t));
      auto reg = open_store(g)->register_participant(assessment_id, display_name, assignments);
      if (structured(g)) {
        std::cout << json{{"participant", reg.participant.id}, {"token", reg.token}}.dump(2) << '\n';
      } else {
        fmt::print("participant {}\ntoken {}\n(the token is shown only once)\n", reg.participant.id,
                   reg.token);
      }
    };
  });

  // respond
  auto* respond_cmd = app.add_subcommand("respond", "Import responses in bulk");
  std::string responses_file;
  respond_cmd->add_option("id", assessment_id, "Assessment id")->required();
  respond_cmd->add_option("--file", responses_file, "Responses file")->required();
  respond_cmd->callback([&] {
    action = [&] {
      auto store = open_store(g);
      auto responses = smpa::responses_from_json(read_json_file(responses_file));
      for (const auto& r : responses) {
        store->submit(assessment_id, r.participant, r.process, r.question, r.answer);
      }
      fmt::print("stored {} responses\n", responses.size());
    };
  });

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate scripted responses");
  std::string profile_file;
  std::optional<std::uint64_t> seed;
  std::string simulate_out;
  bool no_submit = false;
  simulate_cmd->add_option("id", assessment_id, "Assessment id")->required();
  simulate_cmd->add_option("--profile", profile_file, "Simulation profile")->required();
  simulate_cmd->add_option("--seed", seed, "Random seed (overrides the profile)");
  simulate_cmd->add_option("--out", simulate_out, "Also write the responses file here");
  simulate_cmd->add_flag("--no-submit", no_submit, "Register the roster but store no responses");
  simulate_cmd->callback([&] {
    action = [&] {
      auto store = open_store(g);
      auto profile = smpa::parse_simulation_profile(read_json_file(profile_file));
      std::vector<std::string> ids;
      for (const auto& entry : profile.roster) {
        const auto a = store->get(assessment_id);
        const smpa::Participant* existing = nullptr;
        for (const auto& p : a.participants) {
          if (p.display_name == entry.display_name) existing = &p;
        }
        if (existing != nullptr) {
          if (existing->assignments != entry.assignments) {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("participant '{}' exists with different assignments",
                                    entry.display_name));
          }
          ids.push_back(existing->id);
        } else {
          ids.push_back(
              store->register_participant(assessment_id, entry.display_name, entry.assignments)
                  .participant.id);
        }
      }
      const auto responses = smpa::simulate_responses(store->get(assessment_id), store->bank(),
                                                      profile, ids, seed.value_or(profile.seed));
      if (!simulate_out.empty()) {
        write_output(simulate_out, smpa::responses_to_json(responses).dump(2) + "\n");
      }
      if (!no_submit) {
        for (const auto& r : responses) {
          store->submit(assessment_id, r.participant, r.process, r.question, r.answer);
        }
      }
      fmt::print(stderr, "simulated {} responses for {} participants\n", responses.size(),
                 ids.size());
    };
  });

  // progress
  auto* progress_cmd = app.add_subcommand("progress", "Show participation");
  progress_cmd->add_option("id", assessment_id, "Assessment id")->required();
  progress_cmd->callback([&] {
    action = [&] {
      auto snap = open_store(g)->progress_of(assessment_id);
      if (structured(g)) {
        std::cout << smpa::to_json(snap).dump(2) << '\n';
        return;
      }
      fmt::print("{} [{}]: {}/{} answered ({:.1f}%)\n", snap.assessment,
                 smpa::to_string(snap.state), snap.answered, snap.allocated,
                 100.0 * snap.completion);
      for (const auto& pp : snap.participants) {
        fmt::print("  {} {:<20} {:>4}/{:<4} {:5.1f}%{}\n", pp.participant, pp.display_name,
                   pp.answered, pp.allocated, 100.0 * pp.completion,
                   pp.zero_allocation ? "  (no questions allocated)" : "");
      }
    };
  });

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "Compute capability results");
  double cv_threshold = 0.5;
  measure_cmd->add_option("id", assessment_id, "Assessment id")->required();
  measure_cmd->add_option("--cv-threshold", cv_threshold, "Low-reliability threshold");
  measure_cmd->callback([&] {
    action = [&] {
      smpa::MeasurementConfig config;
      config.cv_threshold = cv_threshold;
      auto results = open_store(g)->results_of(assessment_id, config);
      if (structured(g)) {
        std::cout << smpa::results_to_json(results).dump(2) << '\n';
      } else {
        print_results(results);
      }
    };
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Assessment reports");
  report_cmd->require_subcommand(1);
  std::string format_text = "structured";
  std::string report_out;
  auto* generate_cmd = report_cmd->add_subcommand("generate", "Build and render the report");
  generate_cmd->add_option("id", assessment_id, "Assessment id")->required();
  generate_cmd->add_option("--format", format_text, "structured, markdown or html");
  generate_cmd->add_option("--out", report_out, "Output file (stdout by default)");
  generate_cmd->add_option("--cv-threshold", cv_threshold, "Low-reliability threshold");
  generate_cmd->callback([&] {
    action = [&] {
      const auto format = smpa::parse_report_format(format_text);
      smpa::MeasurementConfig config;
      config.cv_threshold = cv_threshold;
      auto report = open_store(g)->build_report(assessment_id, config);
      write_output(report_out, smpa::render_report(report, format));
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  smpa::ServiceConfig service_config;
  service_config.port = std::atoi(env_or("PORT", "8080").c_str());
  service_config.facilitator_key = env_or("FACILITATOR_KEY", "");
  std::string static_dir;
  serve_cmd->add_option("--port", service_config.port, "Listen port, 0 for any (env PORT)");
  serve_cmd->add_option("--host", service_config.host, "Listen address");
  serve_cmd->add_option("--facilitator-key", service_config.facilitator_key,
                        "Facilitator secret (env FACILITATOR_KEY)");
  serve_cmd->add_option("--static-dir", static_dir, "Serve a web UI bundle from this directory");
  serve_cmd->add_flag("--access-log", service_config.access_log, "Log requests to stderr");
  serve_cmd->callback([&] {
    action = [&] {
      service_config.data_dir = g.data_dir;
      service_config.bank_path = g.bank_path;
      if (service_config.bank_path.empty()) {
        throw Error(ErrorCode::ValidationError, "no bank given (use --bank or BANK_PATH)");
      }
      if (!static_dir.empty()) service_config.static_dir = static_dir;
      smpa::Service service(service_config);
      const int port = service.bind();
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << "listening on " << service_config.host << ":" << port << std::endl;
      service.run();
      g_service = nullptr;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return usage_exit(app, e);
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
