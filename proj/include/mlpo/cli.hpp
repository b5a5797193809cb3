#pragma once

#include <string>

#include "mlpo/experiments.hpp"
#include "mlpo/symbol.hpp"

// Command-line front end.  Subcommands:
//   exponents {critical|check}   order formulas and admissibility margins
//   norm                         sequence and function-space quasi-norms
//   windows {make|verify}        partition construction and verification
//   op apply                     operator application (direct or expansion)
//   extremal {wainger|enumerate|sum}
//   experiment {sharpness-s|sharpness-sj|keyprop|band-decay|embeddings|
//               wainger-contrast}
// Exit codes: 0 success (outputs written), 1 configuration error (the message
// names the offending field or flag), 2 computation error or failed
// verification.  Identical invocations produce byte-identical outputs.
namespace mlpo {

int cli_main(int argc, const char* const* argv);

// --- config parsing, shared with the test suite --------------------------------
//
// Each parser takes the full JSON text of a config file, applies defaults for
// absent keys, and rejects unknown keys naming the offender.

Symbol symbol_from_json(const std::string& text);

SharpnessSConfig sharpness_s_config_from_json(const std::string& text);
SharpnessSjConfig sharpness_sj_config_from_json(const std::string& text);
KeypropConfig keyprop_config_from_json(const std::string& text);
BandDecayConfig band_decay_config_from_json(const std::string& text);
EmbeddingConfig embedding_config_from_json(const std::string& text);
WaingerContrastConfig wainger_contrast_config_from_json(const std::string& text);

// Report output paths: the CSV path names the run; the JSON sidecar replaces
// the extension; multi-report runs insert the report name before it.
std::string sidecar_path(const std::string& csv_path);
std::string multi_report_path(const std::string& csv_path, const std::string& name);

}  // namespace mlpo
