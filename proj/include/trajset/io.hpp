#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "trajset/dataset.hpp"
#include "trajset/metrics.hpp"
#include "trajset/model.hpp"
#include "trajset/setgen.hpp"

namespace trajset::io {

/// Schema violation with file/row location in the message.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

// Every writer emits a byte-deterministic file for identical inputs; every
// read(write(x)) is value-identical to x.

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(std::istream& in, const std::string& name = "<stream>");
Dataset read_dataset(const std::string& path);

void write_set(const setgen::TrajectorySet& set, std::ostream& out);
void write_set(const setgen::TrajectorySet& set, const std::string& path);
setgen::TrajectorySet read_set(std::istream& in,
                               const std::string& name = "<stream>");
setgen::TrajectorySet read_set(const std::string& path);

void write_checkpoint(const model::ClassifierModel& m, std::ostream& out);
void write_checkpoint(const model::ClassifierModel& m,
                      const std::string& path);
model::ClassifierModel read_checkpoint(std::istream& in,
                                       const std::string& name = "<stream>");
model::ClassifierModel read_checkpoint(const std::string& path);

void write_report(const metrics::MetricReport& report, std::ostream& out);
void write_report(const metrics::MetricReport& report,
                  const std::string& path);
metrics::MetricReport read_report(std::istream& in,
                                  const std::string& name = "<stream>");
metrics::MetricReport read_report(const std::string& path);

}  // namespace trajset::io
