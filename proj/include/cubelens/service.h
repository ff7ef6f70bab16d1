// Read-only JSON query layer over a dataset loaded at start-up.
//
// Endpoints (all GET unless noted):
//   /schema
//   POST /evaluate                 estimator + policy -> evaluation summary
//   /events                        abnormal-hour events
//   /events/{id}/authors           author drill-down
//   /events/{id}/spreaders?author= spreader drill-down
//   /events/{id}/hashtags          event-local abnormal hashtags
//   /hashtags                      global abnormal (hashtag, day, hour) triplets
//   /topics?n=
//   /predict?s=&k=&d=&h=
// Errors are {"error": {"status", "message"}} with 400 for malformed
// requests, 404 for unknown events or entities and 409 when no data is
// loaded or the requested cube is empty.

#ifndef CUBELENS_SERVICE_H_
#define CUBELENS_SERVICE_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "cubelens/detect.h"
#include "cubelens/ingest.h"
#include "cubelens/pipeline.h"

namespace cubelens {

using QueryParams = std::multimap<std::string, std::string>;

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::string ui_dir;          // served under /ui when non-empty
  std::size_t page_limit = 500;
  LinkPredictionMode linkpred = LinkPredictionMode::kLiteral;
};

class Service {
 public:
  // No dataset: every data endpoint answers 409.
  Service();
  Service(Dataset dataset, std::optional<CommunityAssignment> communities,
          ServiceOptions options = {});
  ~Service();

  bool loaded() const { return loaded_; }

  // Dispatches one request. Never throws; failures map to error responses.
  ServiceResponse HandleQuery(std::string_view method, std::string_view path,
                              const QueryParams& params, std::string_view body = {}) const;

  // Blocks serving HTTP/1.1 until Stop() is called or the socket fails.
  // Port 0 picks a free port. `on_ready` receives the bound port once the
  // server accepts connections. Returns false when the address cannot be
  // bound.
  bool Serve(const std::string& host, int port,
             std::function<void(int)> on_ready = {});
  void Stop();

 private:
  struct State;
  bool loaded_ = false;
  std::unique_ptr<State> state_;
};

}  // namespace cubelens

#endif  // CUBELENS_SERVICE_H_
