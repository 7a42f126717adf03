#pragma once

#include "config.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pimsner::lab {

enum class Command { validate, schur, lift_check, expectation, certificate, report };

const std::vector<std::string>& command_names();
Command parse_command(const std::string& name);
const char* command_name(Command c);

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json details;
};

struct RunReport {
  RunConfig config;
  nlohmann::ordered_json spec;
  std::vector<SuiteResult> suites;
  SchurTable table;
  std::vector<nlohmann::ordered_json> certificates;
  bool pass = false;
};

struct ReportBundle {
  std::string command;
  std::string created = kDefaultCreated;
  std::vector<RunReport> runs;

  bool pass() const;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `cfg` must be resolved. The correspondence is validated first; a failed
// validation skips the remaining suites.
RunReport run(Command command, const RunConfig& cfg);

nlohmann::ordered_json certificate_json(const CPAPCertificate& cert, const nlohmann::ordered_json& spec,
                                        const std::string& created);
nlohmann::ordered_json bundle_json(const ReportBundle& bundle);
// Schur rows of every run, in run order.
std::string bundle_csv(const ReportBundle& bundle);
std::string serialize(const ReportBundle& bundle, const std::string& format);
// Empty path writes to stdout. Throws IoError.
void write_output(const std::string& text, const std::string& path);

int exit_code(const ReportBundle& bundle);

}  // namespace pimsner::lab
