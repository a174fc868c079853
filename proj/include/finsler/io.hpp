#pragma once

#include <json.hpp>
#include <string>

#include "finsler/cartan.hpp"
#include "finsler/curvature.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/observer.hpp"
#include "finsler/scan.hpp"
#include "finsler/transport.hpp"

namespace finsler {

const char* library_version();

// Locale-independent shortest round-trip formatting ('.' decimal always).
std::string format_double(double v);

// CSV documents start with '#' comment lines carrying the library version
// and the resolved run configuration, followed by a header row. LF newlines
// and '.' decimals throughout, so identical inputs give identical bytes.
std::string scan_csv(const ScanResult& r, const nlohmann::json& config);
std::string trajectory_csv(const Trajectory& t, const nlohmann::json& config);

// JSON reports embed the same version string and resolved configuration.
nlohmann::json scan_summary_json(const ScanResult& r,
                                 const nlohmann::json& config);
nlohmann::json transport_report_json(const GeneralizedLorentz& g,
                                     const Vec4& x,
                                     const FrameAtPoint& from,
                                     const FrameAtPoint& to,
                                     const nlohmann::json& config);
nlohmann::json curvature_report_json(const FundamentalModel& m,
                                     const TangentPoint& p,
                                     const nlohmann::json& config);
nlohmann::json cartan_report_json(const FundamentalModel& m,
                                  const TangentPoint& p, const ModelGroup& grp,
                                  const CartanConditionReport& conditions,
                                  const MmDensityValue& mm,
                                  const nlohmann::json& config);
nlohmann::json observer_report_json(const FundamentalModel& m,
                                    const TangentPoint& p,
                                    const nlohmann::json& config);

// Serializes with 2-space indent and a trailing newline.
std::string json_to_string(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace finsler
