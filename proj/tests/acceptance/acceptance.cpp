// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "../process.hpp"
#include "../support.hpp"
#include "smpa/measurement.hpp"
#include "smpa/reporting.hpp"

using namespace smpa;
using nlohmann::json;
using testing::kNow;

namespace {

constexpr double kTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (messages_.size() < 5) messages_.push_back(what);
    }
  }
  void note(std::string text) { note_ = std::move(text); }
  Outcome outcome() const {
    Outcome o;
    o.pass = failures_ == 0;
    if (o.pass) {
      o.detail = note_;
    } else {
      o.detail = fmt::format("{} failure(s)", failures_);
      for (const auto& m : messages_) o.detail += "; " + m;
    }
    return o;
  }

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
  std::string note_;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool near(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= kTol;
}

// ---------------------------------------------------------------------------
// Independent oracles. These work from the raw bank document and plain
// response tuples and share no code with the measurement module.

const std::array<const char*, 9> kAttrNames = {"PA1.1", "PA2.1", "PA2.2", "PA3.1", "PA3.2",
                                               "PA4.1", "PA4.2", "PA5.1", "PA5.2"};
const std::array<int, 9> kAttrLevel = {1, 2, 2, 3, 3, 4, 4, 5, 5};

// 0..3 = N..F, 4 = Unassessed.
int oracle_capability(const std::array<int, 9>& r) {
  int cap = 5;
  for (int i = 0; i < 9; ++i) {
    const int k = kAttrLevel[i];
    if (r[i] == 3) continue;
    cap = std::min(cap, r[i] == 2 ? k : k - 1);
  }
  return cap;
}

int oracle_band(double x) {
  if (x <= 15.0) return 0;
  if (x <= 50.0) return 1;
  if (x <= 85.0) return 2;
  return 3;
}

double oracle_percent(const std::string& answer) {
  if (answer == "N") return 7.5;
  if (answer == "P") return 32.5;
  if (answer == "L") return 67.5;
  return 92.5;
}

struct OracleAttr {
  std::size_t n = 0;
  std::optional<double> mean;
  int band = 4;
  std::optional<double> cv;
};

struct OracleQuestion {
  std::optional<double> score;
  int band = 4;
};

struct OracleProcess {
  std::array<OracleAttr, 9> attrs;
  std::map<std::string, OracleQuestion> questions;
  int capability = 0;
};

struct RawBank {
  std::map<std::string, int> attribute_of;  // question -> attribute index
};

RawBank raw_bank() {
  RawBank b;
  const auto doc = json::parse(slurp(testing::kSampleBank));
  for (const auto& q : doc["questions"]) {
    const auto name = q["attribute"].get<std::string>();
    for (int i = 0; i < 9; ++i) {
      if (name == kAttrNames[i]) b.attribute_of[q["id"]] = i;
    }
  }
  return b;
}

struct Tuple {
  std::string process;
  std::string question;
  std::string answer;
};

OracleProcess oracle_process(const RawBank& bank, const std::vector<Tuple>& responses,
                             const std::string& process) {
  std::array<std::vector<double>, 9> by_attr;
  std::map<std::string, std::vector<double>> by_question;
  for (const auto& t : responses) {
    if (t.process != process) continue;
    auto& q = by_question[t.question];
    if (t.answer == "Unable") continue;
    const double x = oracle_percent(t.answer);
    q.push_back(x);
    by_attr[bank.attribute_of.at(t.question)].push_back(x);
  }
  OracleProcess out;
  std::array<int, 9> bands{};
  for (int i = 0; i < 9; ++i) {
    auto& a = out.attrs[i];
    const auto& xs = by_attr[i];
    a.n = xs.size();
    if (!xs.empty()) {
      double s = 0;
      for (double x : xs) s += x;
      const double m = s / xs.size();
      a.mean = m;
      a.band = oracle_band(m);
      if (xs.size() >= 2 && m > 0) {
        double v = 0;
        for (double x : xs) v += (x - m) * (x - m);
        a.cv = std::sqrt(v / xs.size()) / m;
      }
    }
    bands[i] = a.band;
  }
  for (const auto& [id, xs] : by_question) {
    OracleQuestion q;
    if (!xs.empty()) {
      double s = 0;
      for (double x : xs) s += x;
      q.score = s / xs.size();
      q.band = oracle_band(*q.score);
    }
    out.questions[id] = q;
  }
  out.capability = oracle_capability(bands);
  return out;
}

int band_index(const Rating& r) { return r ? static_cast<int>(*r) : 4; }

// ---------------------------------------------------------------------------
// Random closed assessments over the sample bank.

const std::vector<std::string> kProcesses = {"SLM", "CHG", "PRB", "CFG"};

Assessment random_assessment(std::mt19937_64& rng, const ContentBank& bank) {
  std::vector<std::string> procs = kProcesses;
  std::shuffle(procs.begin(), procs.end(), rng);
  procs.resize(1 + rng() % 2);
  const auto target = static_cast<CapabilityLevel>(1 + rng() % 5);
  auto a = create_assessment(bank, "rand", "", procs, target, kNow);

  const int people = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < people; ++i) {
    std::vector<Assignment> as;
    for (const auto& p : procs) {
      if (as.empty() || rng() % 2) as.push_back({p, kAllRoles[rng() % 3]});
    }
    testing::add_participant(a, bank, "P" + std::to_string(i), as);
  }
  open_assessment(a, kNow);

  // Skewed answer weights per assessment give every band a chance.
  std::array<double, 5> w{};
  for (auto& x : w) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  w[4] *= 0.4;
  std::discrete_distribution<int> pick(w.begin(), w.end());
  const double answer_rate = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
  std::bernoulli_distribution answered(answer_rate);
  for (const auto& p : a.participants) {
    for (const auto& q : allocate_questionnaire(a, bank, p.id)) {
      if (!answered(rng)) continue;
      submit_response(a, bank, p.id, q.process, q.question->id, kAllAnswers[pick(rng)], kNow);
    }
  }
  close_assessment(a, kNow);
  return a;
}

std::vector<Tuple> tuples_of(const Assessment& a) {
  std::vector<Tuple> out;
  for (const auto& [k, r] : a.responses) {
    out.push_back({r.process, r.question, std::string(to_string(r.answer))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Child processes for the CLI server.

struct Server {
  pid_t pid = -1;
  int port = 0;
};

Server spawn_server(const std::filesystem::path& data_dir, const std::string& key) {
  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    const std::string bank = testing::kSampleBank.string();
    const std::string dir = data_dir.string();
    execl(testing::kCli.c_str(), testing::kCli.c_str(), "--data-dir", dir.c_str(), "--bank",
          bank.c_str(), "serve", "--port", "0", "--facilitator-key", key.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  std::string line;
  char c;
  while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
  close(fds[0]);
  Server s;
  s.pid = pid;
  const auto colon = line.rfind(':');
  if (line.rfind("listening on ", 0) != 0 || colon == std::string::npos) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    throw std::runtime_error("server did not start: " + line);
  }
  s.port = std::stoi(line.substr(colon + 1));
  return s;
}

void stop_server(Server& s, int signal) {
  if (s.pid > 0) {
    kill(s.pid, signal);
    waitpid(s.pid, nullptr, 0);
    s.pid = -1;
  }
}

struct Api {
  httplib::Client client;
  std::string key;

  Api(int port, std::string facilitator_key)
      : client("127.0.0.1", port), key(std::move(facilitator_key)) {
    client.set_read_timeout(10, 0);
  }

  httplib::Headers auth(const std::string& credential) const {
    return {{"Authorization", "Bearer " + credential}};
  }
  httplib::Result post(const std::string& path, const json& body, const std::string& credential) {
    return client.Post(path, auth(credential), body.dump(), "application/json");
  }
  httplib::Result get(const std::string& path, const std::string& credential) {
    return client.Get(path, auth(credential));
  }
};

json require_ok(const httplib::Result& r, const std::string& what) {
  if (!r) throw std::runtime_error(what + ": no response");
  if (r->status / 100 != 2) {
    throw std::runtime_error(fmt::format("{}: HTTP {} {}", what, r->status, r->body));
  }
  return json::parse(r->body);
}

// ---------------------------------------------------------------------------
// Criteria.

Outcome ladder_oracle() {
  Check check;
  std::array<Rating, kAttributeCount> ratings{};
  std::array<int, 9> digits{};
  std::size_t vectors = 0;
  const auto run = [&](int base) {
    std::size_t total = 1;
    for (int i = 0; i < 9; ++i) total *= base;
    for (std::size_t v = 0; v < total; ++v) {
      std::size_t x = v;
      for (int i = 0; i < 9; ++i) {
        digits[i] = static_cast<int>(x % base);
        x /= base;
        ratings[i] = digits[i] == 4 ? Rating{} : Rating{static_cast<RatingBand>(digits[i])};
      }
      const int got = to_int(determine_capability_level(ratings));
      const int want = oracle_capability(digits);
      check.expect(got == want, fmt::format("vector {} base {}: {} vs oracle {}", v, base, got, want));
      ++vectors;
    }
  };
  run(4);
  const std::size_t four = vectors;
  run(5);  // also with Unassessed in every position
  check.note(fmt::format("{} NPLF vectors exact, plus {} with Unassessed", four, vectors - four));
  return check.outcome();
}

Outcome cl3_rule() {
  Check check;
  using enum RatingBand;
  // PA1.1 PA2.1 PA2.2 PA3.1 PA3.2 PA4.1 PA4.2 PA5.1 PA5.2
  const std::array<Rating, kAttributeCount> base = {F, F, F, L, F, P, N, N, N};
  check.expect(determine_capability_level(base) == CapabilityLevel::CL3, "example is not CL3");

  auto both_l = base;
  both_l[index_of(ProcessAttribute::PA3_2)] = L;
  check.expect(determine_capability_level(both_l) == CapabilityLevel::CL3, "PA3.1=L,PA3.2=L not CL3");

  for (auto attr : {ProcessAttribute::PA1_1, ProcessAttribute::PA2_1, ProcessAttribute::PA2_2}) {
    auto r = base;
    r[index_of(attr)] = L;
    const auto got = determine_capability_level(r);
    check.expect(got < CapabilityLevel::CL3,
                 fmt::format("{}=L still reaches CL3", to_string(attr)));
    check.expect(got == level_of(attr),
                 fmt::format("{}=L gives CL{}", to_string(attr), to_int(got)));
  }
  for (auto attr : {ProcessAttribute::PA3_1, ProcessAttribute::PA3_2}) {
    for (Rating low : {Rating{P}, Rating{N}, Rating{}}) {
      auto r = base;
      r[index_of(attr)] = low;
      check.expect(determine_capability_level(r) == CapabilityLevel::CL2,
                   fmt::format("{}={} not CL2", to_string(attr), rating_to_string(low)));
    }
  }
  auto above = base;
  above[index_of(ProcessAttribute::PA4_1)] = F;
  above[index_of(ProcessAttribute::PA4_2)] = F;
  check.expect(determine_capability_level(above) == CapabilityLevel::CL3,
               "PA3.1=L must stop the ladder at CL3");
  check.note("example CL3; sub-CL3 L blocks CL3; PA3.x below L gives CL2");
  return check.outcome();
}

Outcome bank_structure() {
  Check check;
  const auto r = testing::run_cli({"--output", "structured", "bank", "stats",
                                   testing::kSampleBank.string()});
  check.expect(r.exit_code == 0, "bank stats exit " + std::to_string(r.exit_code));
  if (r.exit_code != 0) return check.outcome();
  const auto s = json::parse(r.output);
  check.expect(s["processes"] == 4, "processes " + s["processes"].dump());
  check.expect(s["process_specific_questions"] == 46, "PA1.1 " + s["process_specific_questions"].dump());
  check.expect(s["generic_questions"] == 127, "generic " + s["generic_questions"].dump());
  check.expect(s["total_questions"] == 173, "total " + s["total_questions"].dump());
  check.expect(s["knowledge_items"] == 151, "items " + s["knowledge_items"].dump());
  check.expect(s["per_attribute"]["PA1.1"] == 46, "per-attribute PA1.1");
  check.note("4 processes, 46 + 127 = 173 questions, 151 knowledge items");
  return check.outcome();
}

Outcome measurement_oracle() {
  Check check;
  const auto& bank = *testing::sample_bank();
  const auto raw = raw_bank();
  std::mt19937_64 rng(0x5eed0001);

  std::size_t attrs_checked = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto a = random_assessment(rng, bank);
    const auto tuples = tuples_of(a);
    for (const auto& result : measure(a, bank)) {
      const auto want = oracle_process(raw, tuples, result.process.id);
      const auto where = fmt::format("set {} {}", round, result.process.id);
      check.expect(to_int(result.capability_level) == want.capability, where + " capability");
      for (std::size_t i = 0; i < 9; ++i) {
        const auto& got = result.attributes[i];
        const auto& exp = want.attrs[i];
        check.expect(got.count == exp.n, where + " count " + kAttrNames[i]);
        check.expect(near(got.mean_percent, exp.mean), where + " mean " + kAttrNames[i]);
        check.expect(near(got.cv, exp.cv), where + " cv " + kAttrNames[i]);
        check.expect(band_index(got.rating) == exp.band, where + " band " + kAttrNames[i]);
        ++attrs_checked;
      }
      for (const auto& q : result.questions) {
        auto it = want.questions.find(q.question);
        const OracleQuestion exp = it == want.questions.end() ? OracleQuestion{} : it->second;
        check.expect(near(q.knowledge_score, exp.score), where + " score " + q.question);
        check.expect(band_index(q.band) == exp.band, where + " qband " + q.question);
      }
    }
  }

  // Monotonicity: raise one scorable response by one step.
  std::size_t mono = 0;
  while (mono < 1000) {
    auto a = random_assessment(rng, bank);
    std::vector<ResponseKey> raisable;
    for (const auto& [k, r] : a.responses) {
      if (r.answer != AnswerOption::Unable && r.answer != AnswerOption::F) raisable.push_back(k);
    }
    if (raisable.empty()) continue;
    const auto key = raisable[rng() % raisable.size()];
    const auto before = assess_process(a, bank, key.process);
    auto& r = a.responses.at(key);
    r.answer = static_cast<AnswerOption>(static_cast<int>(r.answer) + 1);
    const auto after = assess_process(a, bank, key.process);
    for (std::size_t i = 0; i < 9; ++i) {
      const auto& b = before.attributes[i];
      const auto& c = after.attributes[i];
      check.expect(!b.mean_percent || *c.mean_percent >= *b.mean_percent - kTol,
                   fmt::format("monotonicity mean {} #{}", kAttrNames[i], mono));
      check.expect(band_index(b.rating) == 4 || band_index(c.rating) >= band_index(b.rating),
                   fmt::format("monotonicity band {} #{}", kAttrNames[i], mono));
    }
    for (std::size_t i = 0; i < before.questions.size(); ++i) {
      const auto& b = before.questions[i];
      const auto& c = after.questions[i];
      check.expect(!b.knowledge_score || *c.knowledge_score >= *b.knowledge_score - kTol,
                   fmt::format("monotonicity question #{}", mono));
    }
    check.expect(after.capability_level >= before.capability_level,
                 fmt::format("monotonicity capability #{}", mono));
    ++mono;
  }

  // Permutation and duplication invariance on attribute response sets.
  std::size_t perm = 0;
  std::size_t dup = 0;
  while (perm < 1000 || dup < 1000) {
    const auto a = random_assessment(rng, bank);
    std::map<std::pair<std::string, int>, std::vector<Response>> groups;
    for (const auto& [k, r] : a.responses) {
      groups[{r.process, static_cast<int>(bank.find_question(r.question)->attribute)}].push_back(r);
    }
    for (auto& [g, rs] : groups) {
      const auto attr = static_cast<ProcessAttribute>(g.second);
      const auto base = attribute_result(bank, attr, g.first, rs);
      if (perm < 1000) {
        auto shuffled = rs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto p = attribute_result(bank, attr, g.first, shuffled);
        check.expect(p.count == base.count && p.rating == base.rating &&
                         p.low_reliability == base.low_reliability &&
                         near(p.mean_percent, base.mean_percent) && near(p.cv, base.cv),
                     fmt::format("permutation #{}", perm));
        ++perm;
      }
      if (dup < 1000) {
        auto doubled = rs;
        doubled.insert(doubled.end(), rs.begin(), rs.end());
        const auto d = attribute_result(bank, attr, g.first, doubled);
        // cv needs two values: a single response duplicated gains a cv of 0.
        const bool cv_ok = base.count == 1 ? (d.cv && *d.cv == 0.0) : near(d.cv, base.cv);
        check.expect(d.count == 2 * base.count && d.rating == base.rating &&
                         near(d.mean_percent, base.mean_percent) && cv_ok,
                     fmt::format("duplication #{}", dup));
        ++dup;
      }
    }
  }
  check.note(fmt::format("1000 response sets ({} attributes) within 1e-9; 1000 each of "
                         "monotonicity, permutation, duplication",
                         attrs_checked));
  return check.outcome();
}

Outcome knowledge_trigger() {
  Check check;
  const auto& bank = *testing::sample_bank();
  const auto raw = raw_bank();
  std::mt19937_64 rng(0x5eed0002);
  std::size_t entries = 0;
  for (int round = 0; round < 500; ++round) {
    const auto a = random_assessment(rng, bank);
    const auto report = compose_report(a, measure(a, bank), bank);
    const auto tuples = tuples_of(a);
    for (const auto& p : report.processes) {
      const auto want = oracle_process(raw, tuples, p.process.id);
      std::set<std::string> expected;
      for (const auto* q : questions_for_process(bank, p.process.id, a.target_level)) {
        auto it = want.questions.find(q->id);
        if (it != want.questions.end() && (it->second.band == 0 || it->second.band == 1)) {
          expected.insert(q->id);
        }
      }
      std::set<std::string> got;
      for (const auto& e : p.entries) got.insert(e.question);
      check.expect(got == expected && got.size() == p.entries.size(),
                   fmt::format("round {} {} entry set", round, p.process.id));
      for (std::size_t i = 1; i < p.entries.size(); ++i) {
        const auto& x = p.entries[i - 1];
        const auto& y = p.entries[i];
        check.expect(x.knowledge_score < y.knowledge_score ||
                         (x.knowledge_score == y.knowledge_score && x.question < y.question),
                     fmt::format("round {} {} order at {}", round, p.process.id, i));
      }
      entries += p.entries.size();
    }
  }
  check.note(fmt::format("500 random assessments, {} entries, set equality and order hold", entries));
  return check.outcome();
}

// Drops the fields that legitimately differ between two runs.
json without_identity(json report) {
  auto& meta = report["assessment"];
  for (const char* k : {"id", "created_at", "opened_at", "closed_at"}) meta.erase(k);
  return report;
}

Outcome golden_run() {
  Check check;
  testing::TempDir dir;
  const auto golden = testing::kSourceDir / "tests/golden";
  const std::vector<std::string> env = {"DATA_DIR=" + (dir.path() / "data").string(),
                                        "BANK_PATH=" + testing::kSampleBank.string(),
                                        "SMPA_NOW=2024-06-11T09:00:00Z"};
  const auto responses = dir.path() / "responses.json";
  const auto report = dir.path() / "report.json";
  const std::vector<std::vector<std::string>> steps = {
      {"assessment", "create", "--processes", "SLM,CHG,PRB,CFG", "--org",
       "Regional utility, IT operations", "--target", "5", "--id", "golden"},
      {"assessment", "open", "golden"},
      {"simulate", "golden", "--profile", (golden / "profile.json").string(), "--seed", "20240611",
       "--out", responses.string()},
      {"assessment", "close", "golden"},
      {"measure", "golden"},
      {"report", "generate", "golden", "--format", "structured", "--out", report.string()}};
  for (const auto& step : steps) {
    const auto r = testing::run_cli(step, env);
    check.expect(r.exit_code == 0, step[0] + " exit " + std::to_string(r.exit_code) + " " + r.errors);
    if (r.exit_code != 0) return check.outcome();
  }
  const auto expected_bytes = slurp(golden / "report.json");
  check.expect(slurp(responses) == slurp(golden / "responses.json"), "simulated responses differ");
  check.expect(slurp(report) == expected_bytes, "CLI report differs from golden bytes");

  // The same inputs through the HTTP API.
  const std::string key = "acceptance-key";
  testing::TempDir api_dir;
  Server server;
  try {
    server = spawn_server(api_dir.path() / "data", key);
    Api api(server.port, key);
    const auto profile = json::parse(slurp(golden / "profile.json"));
    const auto created = require_ok(
        api.post("/api/v1/assessments",
                 {{"org_profile", "Regional utility, IT operations"},
                  {"processes", {"SLM", "CHG", "PRB", "CFG"}},
                  {"target_level", 5}},
                 key),
        "create");
    const auto id = created["id"].get<std::string>();
    std::map<std::string, std::string> tokens;
    for (const auto& person : profile["roster"]) {
      const auto reg = require_ok(api.post("/api/v1/assessments/" + id + "/participants",
                                           {{"display_name", person["name"]},
                                            {"assignments", person["assignments"]}},
                                           key),
                                  "register");
      tokens[reg["participant"]["id"]] = reg["token"];
    }
    require_ok(api.post("/api/v1/assessments/" + id + "/open", json::object(), key), "open");
    const auto scripted = json::parse(slurp(golden / "responses.json"));
    for (const auto& r : scripted["responses"]) {
      require_ok(api.post("/api/v1/me/responses",
                          {{"process", r["process"]}, {"question", r["question"]},
                           {"answer", r["answer"]}},
                          tokens.at(r["participant"])),
                 "respond");
    }
    require_ok(api.post("/api/v1/assessments/" + id + "/close", json::object(), key), "close");
    require_ok(api.get("/api/v1/assessments/" + id + "/results", key), "results");
    require_ok(api.post("/api/v1/assessments/" + id + "/report", json::object(), key), "build");
    const auto fetched = api.get("/api/v1/assessments/" + id + "/report?format=structured", key);
    const auto via_api = require_ok(fetched, "fetch");
    const auto expected = json::parse(expected_bytes);
    const auto diff = json::diff(without_identity(expected), without_identity(via_api));
    check.expect(diff.empty(), "HTTP report differs from golden: " +
                                   (diff.empty() ? std::string() : fmt::format("{} ops, first {}", diff.size(), diff[0].dump())));
  } catch (const std::exception& e) {
    check.expect(false, e.what());
  }
  stop_server(server, SIGTERM);
  check.note("CLI bytes identical to golden; HTTP report identical apart from id and timestamps");
  return check.outcome();
}

Outcome durability() {
  Check check;
  const auto started = std::chrono::steady_clock::now();
  const std::string key = "durability-key";
  testing::TempDir dir;
  const auto data = dir.path() / "data";

  std::string id;
  std::vector<std::pair<std::string, std::vector<std::string>>> people;  // token, questions
  Server server;
  try {
    server = spawn_server(data, key);
    {
      Api api(server.port, key);
      id = require_ok(api.post("/api/v1/assessments",
                               {{"processes", {"PRB", "CHG"}}, {"target_level", 5}}, key),
                      "create")["id"];
      for (int i = 0; i < 3; ++i) {
        const auto reg = require_ok(
            api.post("/api/v1/assessments/" + id + "/participants",
                     {{"display_name", "P" + std::to_string(i)},
                      {"assignments",
                       {{{"process", "PRB"}, {"role", std::string(to_string(kAllRoles[i]))}},
                        {{"process", "CHG"}, {"role", std::string(to_string(kAllRoles[(i + 1) % 3]))}}}}},
                     key),
            "register");
        people.push_back({reg["token"], {}});
      }
      require_ok(api.post("/api/v1/assessments/" + id + "/open", json::object(), key), "open");
    }

    // Each round: a writer submits until the server is SIGKILLed at a random
    // moment; then the server restarts and every acknowledged answer must be
    // there with its acknowledged value.
    std::map<std::tuple<std::string, std::string, std::string>, std::string> acknowledged;
    std::mt19937_64 rng(0x5eed0003);
    std::size_t total_acks = 0;
    for (int round = 0; round < 4; ++round) {
      std::vector<std::tuple<std::string, std::string, std::string, std::string>> plan;
      {
        Api api(server.port, key);
        for (auto& [token, _] : people) {
          const auto q = require_ok(api.get("/api/v1/me/questionnaire", token), "questionnaire");
          for (const auto& section : q["sections"]) {
            for (const auto& item : section["questions"]) {
              plan.emplace_back(token, section["process"], item["id"],
                                std::string(to_string(kAllAnswers[rng() % 5])));
            }
          }
        }
      }
      std::shuffle(plan.begin(), plan.end(), rng);

      std::mutex m;
      std::vector<std::tuple<std::string, std::string, std::string, std::string>> acks;
      // The request cut off by the kill may or may not have committed.
      std::optional<std::tuple<std::string, std::string, std::string, std::string>> in_flight;
      std::thread writer([&, port = server.port] {
        Api api(port, key);
        for (const auto& item : plan) {
          const auto& [token, process, question, answer] = item;
          in_flight = item;
          auto r = api.post("/api/v1/me/responses",
                            {{"process", process}, {"question", question}, {"answer", answer}},
                            token);
          if (!r || r->status != 200) return;
          std::lock_guard lock(m);
          acks.emplace_back(token, process, question, answer);
          in_flight.reset();
        }
      });
      std::this_thread::sleep_for(std::chrono::milliseconds(50 + rng() % 250));
      stop_server(server, SIGKILL);
      writer.join();
      for (const auto& [token, process, question, answer] : acks) {
        acknowledged[{token, process, question}] = answer;
      }
      total_acks += acks.size();

      server = spawn_server(data, key);
      Api api(server.port, key);
      std::size_t found = 0;
      for (auto& [token, _] : people) {
        const auto q = require_ok(api.get("/api/v1/me/questionnaire", token), "questionnaire");
        for (const auto& section : q["sections"]) {
          for (const auto& item : section["questions"]) {
            auto it = acknowledged.find({token, section["process"], item["id"]});
            if (it == acknowledged.end()) continue;
            ++found;
            const bool was_in_flight =
                in_flight && std::get<0>(*in_flight) == token &&
                std::get<1>(*in_flight) == section["process"] &&
                std::get<2>(*in_flight) == item["id"] && item["answer"] == std::get<3>(*in_flight);
            if (was_in_flight) it->second = std::get<3>(*in_flight);
            check.expect(item["answer"] == it->second,
                         fmt::format("round {}: {} lost or wrong", round, item["id"].dump()));
          }
        }
      }
      check.expect(found == acknowledged.size(),
                   fmt::format("round {}: {} of {} acknowledged found", round, found,
                               acknowledged.size()));
    }
    check.expect(total_acks > 0, "no submission was acknowledged before the kill");
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    check.expect(elapsed.count() < 60.0, fmt::format("took {:.1f}s", elapsed.count()));
    check.note(fmt::format("4 SIGKILL rounds, {} acknowledged submissions, all present; {:.1f}s",
                           total_acks, elapsed.count()));
  } catch (const std::exception& e) {
    check.expect(false, e.what());
  }
  stop_server(server, SIGTERM);
  return check.outcome();
}

Outcome degenerate() {
  Check check;
  const auto& bank = *testing::sample_bank();

  // Every attribute answered F except PA2.2, which gets nothing.
  auto a = testing::staffed_assessment(bank, {"PRB"});
  for (const auto& p : a.participants) {
    for (const auto& q : allocate_questionnaire(a, bank, p.id)) {
      if (q.question->attribute == ProcessAttribute::PA2_2) continue;
      submit_response(a, bank, p.id, q.process, q.question->id, AnswerOption::F, kNow);
    }
  }
  close_assessment(a, kNow);
  const auto r = assess_process(a, bank, "PRB");
  const auto& pa22 = r.attributes[index_of(ProcessAttribute::PA2_2)];
  check.expect(!pa22.rating && pa22.count == 0 && !pa22.mean_percent && !pa22.cv,
               "zero-response PA2.2 is not Unassessed");
  check.expect(r.capability_level == CapabilityLevel::CL1,
               fmt::format("capability CL{} instead of CL1", to_int(r.capability_level)));

  // One question answered Unable by everyone, the rest N.
  auto b = testing::staffed_assessment(bank, {"PRB"});
  std::string unable_question;
  for (const auto* q : questions_for_process(bank, "PRB", CapabilityLevel::CL5)) {
    if (q->knowledge_item && q->roles.size() > 1) {
      unable_question = q->id;
      break;
    }
  }
  for (const auto& p : b.participants) {
    for (const auto& q : allocate_questionnaire(b, bank, p.id)) {
      const auto answer = q.question->id == unable_question ? AnswerOption::Unable : AnswerOption::N;
      submit_response(b, bank, p.id, q.process, q.question->id, answer, kNow);
    }
  }
  close_assessment(b, kNow);
  const auto rb = assess_process(b, bank, "PRB");
  bool seen = false;
  for (const auto& q : rb.questions) {
    if (q.question != unable_question) continue;
    seen = true;
    check.expect(!q.band && !q.knowledge_score && q.count == 0 && q.unable_count > 1,
                 "all-Unable question is not Unassessed");
  }
  check.expect(seen, "all-Unable question missing from results");
  const auto report = compose_report(b, measure(b, bank), bank);
  std::size_t entries = 0;
  for (const auto& e : report.processes[0].entries) {
    check.expect(e.question != unable_question, "all-Unable question has a report entry");
    ++entries;
  }
  check.expect(entries > 0, "control questions produced no entries");
  check.note(fmt::format("PA2.2 Unassessed caps PRB at CL1; {} all-Unable, no entry", unable_question));
  return check.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"capability ladder matches brute-force oracle on 4^9 vectors", ladder_oracle},
      {"CL3 rule example and converse cases", cl3_rule},
      {"bank stats: 4 processes, 46 PA1.1, 127 generic, 173 total, 151 items", bank_structure},
      {"measurement oracle and invariance properties", measurement_oracle},
      {"knowledge-item trigger iff band N/P, ascending order", knowledge_trigger},
      {"golden CLI run byte-identical; HTTP run content-identical", golden_run},
      {"acknowledged responses survive kill and restart", durability},
      {"degenerate: zero responses and all-Unable", degenerate},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("{} criterion {}: {} ({}) [{:.2f}s]\n", o.pass ? "PASS" : "FAIL", n,
                             name, o.detail, secs)
              << std::flush;
    failed += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", n - failed, n);
  return failed;
}
