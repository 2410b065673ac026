import { WorkbenchClient } from "./api";
import { mountApp } from "./app";

mountApp(document, new WorkbenchClient());
