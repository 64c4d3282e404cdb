// Copyright (c) The FaaSim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faasim/workload.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace faasim {

double QueueUtilization(double lambda, double mu, int servers) {
  if (lambda <= 0) throw std::invalid_argument("QueueUtilization: lambda");
  if (mu <= 0) throw std::invalid_argument("QueueUtilization: mu");
  if (servers < 1) throw std::invalid_argument("QueueUtilization: servers");
  return lambda * mu / static_cast<double>(servers);
}

int RequiredServers(double lambda, double mu, double rho_target) {
  if (lambda <= 0) throw std::invalid_argument("RequiredServers: lambda");
  if (mu <= 0) throw std::invalid_argument("RequiredServers: mu");
  if (rho_target <= 0 || rho_target > 1)
    throw std::invalid_argument("RequiredServers: rho_target outside (0, 1]");
  double servers = std::ceil(lambda * mu / rho_target);
  return servers < 1 ? 1 : static_cast<int>(servers);
}

ArrivalSequence::ArrivalSequence(double lambda, double mean_service,
                                 uint64_t seed, uint64_t stream)
    : lambda_(lambda), service_rate_(1.0 / mean_service), rng_(seed, stream) {
  if (lambda <= 0) throw std::invalid_argument("ArrivalSequence: lambda");
  if (mean_service <= 0)
    throw std::invalid_argument("ArrivalSequence: mean_service");
}

Arrival ArrivalSequence::Next() {
  clock_ += rng_.NextExp(lambda_);
  return Arrival{clock_, rng_.NextExp(service_rate_)};
}

std::vector<Arrival> GenerateTrace(double lambda, double mean_service,
                                   uint64_t seed, uint64_t stream,
                                   double horizon) {
  std::vector<Arrival> trace;
  if (horizon <= 0) return trace;
  ArrivalSequence seq(lambda, mean_service, seed, stream);
  for (;;) {
    Arrival a = seq.Next();
    if (a.time >= horizon) break;
    trace.push_back(a);
  }
  return trace;
}

namespace {

FunctionSpec Entry(const char* id, LatencyClass cat, double mu, double lambda,
                   bool lock, double ipc, double footprint) {
  FunctionSpec s;
  s.id = id;
  s.category = cat;
  s.mean_service_time = mu;
  s.arrival_rate = lambda;
  s.uses_futex_lock = lock;
  s.isolated_ipc = ipc;
  s.code_footprint = footprint;
  return s;
}

}  // namespace

const std::vector<FunctionSpec>& BuiltinCatalog() {
  static const std::vector<FunctionSpec> kCatalog = {
      Entry("MR", LatencyClass::kSensitive, 0.125, 7.20, false, 1.3, 320),
      Entry("EG", LatencyClass::kSensitive, 0.22, 4.09, false, 1.1, 288),
      Entry("SA", LatencyClass::kSensitive, 0.40, 2.25, false, 0.9, 384),
      Entry("BS", LatencyClass::kSensitive, 0.016, 56.30, false, 1.7, 160),
      Entry("OD", LatencyClass::kSensitive, 0.80, 1.13, true, 0.8, 224),
      Entry("VP", LatencyClass::kDesired, 13.10, 0.07, false, 2.0, 512),
      Entry("IR", LatencyClass::kDesired, 0.003, 300.0, false, 1.5, 96),
      Entry("PC", LatencyClass::kDesired, 0.026, 34.58, false, 1.1, 192),
      Entry("DV", LatencyClass::kDesired, 0.020, 45.0, false, 1.2, 160),
      Entry("PRA", LatencyClass::kDesired, 0.35, 2.50, false, 0.95, 256),
  };
  return kCatalog;
}

const FunctionSpec& CatalogEntry(const std::vector<FunctionSpec>& catalog,
                                 const std::string& id) {
  for (const FunctionSpec& s : catalog)
    if (s.id == id) return s;
  throw std::invalid_argument("unknown workload id: " + id);
}

std::vector<FunctionSpec> LoadCatalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog: " + path);
  std::vector<FunctionSpec> catalog;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string::size_type hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string id, cat;
    double mu, lambda, footprint;
    int lock;
    if (!(ls >> id)) continue;  // blank line
    if (!(ls >> cat >> mu >> lambda >> lock >> footprint))
      throw std::runtime_error("catalog parse error at line " +
                               std::to_string(lineno));
    FunctionSpec s;
    s.id = id;
    if (cat == "LS")
      s.category = LatencyClass::kSensitive;
    else if (cat == "LD")
      s.category = LatencyClass::kDesired;
    else
      throw std::runtime_error("catalog: bad category at line " +
                               std::to_string(lineno));
    if (mu <= 0 || lambda <= 0 || footprint < 0)
      throw std::runtime_error("catalog: non-positive field at line " +
                               std::to_string(lineno));
    s.mean_service_time = mu;
    s.arrival_rate = lambda;
    s.uses_futex_lock = lock != 0;
    s.code_footprint = footprint;
    catalog.push_back(s);
  }
  return catalog;
}

void SaveCatalog(const std::vector<FunctionSpec>& catalog,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog: " + path);
  out << "# id category mu lambda lock footprint\n";
  for (const FunctionSpec& s : catalog) {
    out << s.id << ' '
        << (s.category == LatencyClass::kSensitive ? "LS" : "LD") << ' '
        << s.mean_service_time << ' ' << s.arrival_rate << ' '
        << (s.uses_futex_lock ? 1 : 0) << ' ' << s.code_footprint << '\n';
  }
  if (!out.flush()) throw std::runtime_error("catalog write failed: " + path);
}

std::vector<RequestStream> MakeStreams(const std::vector<FunctionSpec>& specs,
                                       uint64_t master_seed) {
  std::vector<RequestStream> streams;
  streams.reserve(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    RequestStream rs;
    rs.app = specs[i].id;
    rs.arrival_rate = specs[i].arrival_rate;
    rs.mean_service_time = specs[i].mean_service_time;
    rs.seed = master_seed;
    rs.stream = 0x100 + i;
    streams.push_back(rs);
  }
  return streams;
}

}  // namespace faasim
