#include "toxpipe/model/trainer.hpp"

#include <cstdio>

namespace toxpipe::model {

void write_history_csv(std::ostream& out, const History& h) {
  out << "epoch,train_loss,val_loss,train_acc,val_acc\n";
  char buf[160];
  for (std::size_t e = 0; e < h.epochs(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", e + 1, h.train_loss[e], h.val_loss[e],
                  h.train_acc[e], h.val_acc[e]);
    out << buf;
  }
}

}  // namespace toxpipe::model
